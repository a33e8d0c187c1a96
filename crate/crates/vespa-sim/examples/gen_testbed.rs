//! Print the built-in reference testbed as a configuration document.
//!
//! `cargo run --example gen_testbed > testbed.toml`

fn main() {
    let desc = vespa_sim::reference_testbed();
    print!("{}", vespa_sim::serialize_description(&desc).unwrap());
}
