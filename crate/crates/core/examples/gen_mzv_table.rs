//! Regenerates data/mzv_table.txt from the numeric oracle.

fn main() {
    let table = lmo_core::scalars::numeric::generate_table();
    print!("{}", table.to_text());
}
