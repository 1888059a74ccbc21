use mattis::verify::{run_criterion, CRITERIA};

#[test]
fn acceptance() {
    let reports: Vec<_> = (1..=CRITERIA).map(run_criterion).collect();
    for r in &reports {
        println!("{}", r.render());
    }
    println!();
    for r in &reports {
        println!("{}", r.summary_line());
    }
    let failed: Vec<usize> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
