//! Prints the oracle composition table in golden-file form.
//!
//! `cargo run -p tempjoint --example composition_golden > crates/core/tests/golden/composition.tsv`

fn main() {
    print!("{}", tempjoint::algebra::golden_header());
    print!("{}", tempjoint::algebra::oracle_tsv());
}
