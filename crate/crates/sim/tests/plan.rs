use starcrs_sim::config::SimConfig;
use starcrs_sim::plan::run_plan;
use starcrs_sim::table::{compare_tables, figure_tables, gains_over, summarize, ResultTable};

fn small_config(output: &std::path::Path) -> SimConfig {
    let mut cfg = SimConfig::default();
    cfg.system.elements = 2;
    cfg.system.users = 2;
    cfg.system.antennas = 2;
    cfg.plan.values = vec![2.0];
    cfg.plan.schemes = vec!["SDMA-ES".into()];
    cfg.plan.algorithms = vec!["fast".into()];
    cfg.plan.seeds = 3;
    cfg.plan.output = output.to_path_buf();
    cfg
}

#[test]
fn one_row_per_cell_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(&dir.path().join("a.csv"));
    let a = run_plan(&cfg.plan().unwrap(), 2).unwrap();
    assert_eq!(a.rows.len(), 3);
    assert!(a.rows.iter().all(|r| r.is_ok()));
    let cfg_b = small_config(&dir.path().join("b.csv"));
    let b = run_plan(&cfg_b.plan().unwrap(), 1).unwrap();
    assert!(a.same_outcomes(&b));
    assert_eq!(ResultTable::read_csv(&cfg.plan.output).unwrap().rows.len(), 3);
}

#[test]
fn interrupted_run_resumes_to_the_same_table() {
    let dir = tempfile::tempdir().unwrap();
    let full_cfg = small_config(&dir.path().join("full.csv"));
    let full = run_plan(&full_cfg.plan().unwrap(), 1).unwrap();

    let path = dir.path().join("partial.csv");
    let text = std::fs::read_to_string(&full_cfg.plan.output).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let torn = &lines[2][..lines[2].len() / 2];
    lines.truncate(2);
    std::fs::write(&path, format!("{}\n{torn}", lines.join("\n"))).unwrap();
    let cfg = small_config(&path);
    let resumed = run_plan(&cfg.plan().unwrap(), 1).unwrap();
    assert!(resumed.same_outcomes(&full));
    assert_eq!(ResultTable::read_csv(&path).unwrap().rows.len(), 3);
}

#[test]
fn failing_cells_become_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(&dir.path().join("f.csv"));
    cfg.system.relay_power_ratio = -1.0;
    let t = run_plan(&cfg.plan().unwrap(), 1).unwrap();
    assert_eq!(t.rows.len(), 3);
    assert!(t.rows.iter().all(|r| r.status.starts_with("failed") && r.objective.is_none()));
}

fn table_of(rows: &[(&str, u64, f64)]) -> ResultTable {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(&dir.path().join("x.csv"));
    let base = run_plan(&cfg.plan().unwrap(), 1).unwrap().rows[0].clone();
    let rows = rows
        .iter()
        .map(|&(s, seed, v)| {
            let mut r = base.clone();
            r.scheme = s.into();
            r.seed = seed;
            r.objective = Some(v);
            r
        })
        .collect();
    ResultTable { rows }
}

#[test]
fn gains_follow_ratio_arithmetic() {
    let t = table_of(&[("A", 0, 2.0), ("A", 1, 4.0), ("B", 0, 1.0), ("B", 1, 2.0), ("C", 0, 1.0), ("C", 1, 2.0)]);
    let g = gains_over(&t, "B").unwrap();
    let a = g.iter().find(|r| r.scheme == "A").unwrap();
    let c = g.iter().find(|r| r.scheme == "C").unwrap();
    assert!((a.gain_pct - 100.0).abs() < 1e-12);
    assert!(c.gain_pct.abs() < 1e-12);
    assert!((a.ci_low_pct - 100.0).abs() < 1e-9 && (a.ci_high_pct - 100.0).abs() < 1e-9);
    let s = summarize(&t).unwrap();
    assert_eq!(s.len(), 3);
    assert!((s.iter().find(|r| r.scheme == "A").unwrap().mean - 3.0).abs() < 1e-12);
    let cmp = compare_tables(&t, &t).unwrap();
    assert!(cmp.iter().all(|r| r.gain_pct.abs() < 1e-12));
    let figs = figure_tables(&s);
    assert_eq!(figs.len(), 1);
    let text = figs.values().next().unwrap();
    assert!(text.starts_with("N,A,A_std,B,B_std,C,C_std\n"));
}

#[test]
fn empty_tables_are_rejected() {
    let empty = ResultTable::default();
    assert!(summarize(&empty).is_err());
    assert!(gains_over(&empty, "B").is_err());
    assert!(compare_tables(&empty, &empty).is_err());
}
