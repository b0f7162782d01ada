// SPDX-License-Identifier: MIT OR Apache-2.0

//! Regenerates the bundled Give Me Some Credit stand-in:
//! `cargo run -p recourse --example make_gmsc -- crates/core/data/gmsc_standin.csv`

fn main() -> recourse::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "gmsc_standin.csv".to_string());
    recourse::dataset::write_gmsc_standin(&path, 1000, 2023)?;
    println!("wrote {path}");
    Ok(())
}
