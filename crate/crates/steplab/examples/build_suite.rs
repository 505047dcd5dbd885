//! Builds a seeded problem suite and prints its manifest CSV.
//!
//! ```bash
//! cargo run --example build_suite
//! ```

use steplab::problems::{make_suite, write_suite_manifest};

fn main() -> steplab::Result<()> {
    let instance_seed = 1;
    let suite = make_suite(&[1, 2, 3, 5, 8], &[2, 5, 30], instance_seed)?;
    let mut manifest = Vec::new();
    write_suite_manifest(&suite, instance_seed, &mut manifest).expect("in-memory write");
    print!("{}", String::from_utf8(manifest).expect("ascii manifest"));

    // Every instance hits its target at the stored optimum.
    for instance in &suite {
        let at_optimum = instance.evaluate(&instance.x_opt)?;
        assert_eq!(at_optimum, instance.f_opt);
    }
    eprintln!("({} instances; evaluate(x_opt) == f_opt on all of them)", suite.len());
    Ok(())
}
