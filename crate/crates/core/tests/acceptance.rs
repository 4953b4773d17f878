use lmo_core::selftest::checks;

#[test]
fn acceptance_suite() {
    let mut failures = Vec::new();
    for c in checks() {
        let start = std::time::Instant::now();
        let outcome = (c.run)();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(note) => {
                print!("criterion {:>2} ({}): pass [{secs:.1}s]", c.id, c.name);
                if let Some(n) = note {
                    print!(": {n}");
                }
                println!();
            }
            Err(msg) => {
                println!(
                    "criterion {:>2} ({}): FAIL [{secs:.1}s]: {msg}",
                    c.id, c.name
                );
                failures.push((c.id, msg));
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
