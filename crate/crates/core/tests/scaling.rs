//! Linear growth of ρ/Hofer in the thin-overlap regime, where the bad set is
//! negligible next to the strips.

use surface_qm::experiment::{self, ExperimentConfig, Horizon, PeriodRule, StepsRule};

#[test]
fn ratio_grows_linearly_when_overlaps_are_thin() {
    let config = ExperimentConfig {
        t_rule: PeriodRule::PerN(0.0005),
        m_rule: StepsRule::Fixed(40),
        horizon: Horizon::PerPeriod(4),
        samples_per_strip: 20_000,
        ..ExperimentConfig::default()
    };
    let table = experiment::run_sweep(&config).unwrap();
    let first = &table.rows[0];
    for r in &table.rows {
        let n = r.n as f64;
        let scaled = r.rho.value / (-r.tau);
        assert!((scaled - n).abs() <= 0.1 * n, "N={}: ρ/(τd_r) = {scaled}", r.n);
        assert!(r.rho.bad_area <= 2.0 * r.bad_area_budget);
        assert!(((r.hofer_numeric / r.tau) / (first.hofer_numeric / first.tau) - 1.0).abs() < 0.1);
    }
    let last = table.rows.last().unwrap();
    assert!(last.ratio / first.ratio >= 6.0);
}
