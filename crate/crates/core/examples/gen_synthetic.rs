//! Prints the benchmark ontology or its queries in DLGP.
//!
//! `cargo run --example gen_synthetic -- ontology > data/synthetic/ontology.dlgp`
//! `cargo run --example gen_synthetic -- queries > data/synthetic/queries.dlgp`

use piecerew::synthetic::{synthetic_ontology, synthetic_queries};

fn main() {
    match std::env::args().nth(1).as_deref() {
        Some("ontology") => {
            println!("% 50 linear rules, 30 of them concept or role inclusions");
            for r in synthetic_ontology(2024, 50, 30) {
                println!("{r}");
            }
        }
        Some("queries") => {
            for q in synthetic_queries(2024, 12) {
                println!("{q}");
            }
        }
        _ => {
            eprintln!("usage: gen_synthetic ontology|queries");
            std::process::exit(1);
        }
    }
}
