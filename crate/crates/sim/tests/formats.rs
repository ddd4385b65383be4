use starcrs_core::channel::{Scenario, ScenarioSpec};
use starcrs_core::linalg::Complex64;
use starcrs_core::model::Mode;
use starcrs_core::sca::{active_program, passive_program, Problem};
use starcrs_sim::formats::{format_complex, parse_complex, read_program, read_scenario, write_program, write_scenario};
use starcrs_sim::SimError;

fn scenario(elements: usize, mode: Mode) -> Scenario {
    let spec = ScenarioSpec { elements, mode, ..ScenarioSpec::default() }.with_snr_db(20.0).unwrap();
    Scenario::draw(11, &spec).unwrap()
}

#[test]
fn complex_tokens_round_trip() {
    for z in [
        Complex64::new(1.5e-3, -2e-4),
        Complex64::new(-0.0, 0.0),
        Complex64::new(-3.25, 1e300),
        Complex64::new(1.0 / 3.0, -1e-300),
    ] {
        let t = format_complex(z);
        assert!(!t.contains(char::is_whitespace));
        let back = parse_complex(&t).unwrap();
        assert_eq!(back.re.to_bits(), z.re.to_bits(), "{t}");
        assert_eq!(back.im.to_bits(), z.im.to_bits(), "{t}");
    }
    assert!(parse_complex("1.0").is_none());
    assert!(parse_complex("abc+1i").is_none());
}

#[test]
fn scenario_round_trip_is_exact() {
    for (n, mode) in [(8, Mode::FE), (0, Mode::HT)] {
        let s = scenario(n, mode);
        let text = write_scenario(&s.config, &s.channels);
        let (cfg, ch) = read_scenario(&text).unwrap();
        assert_eq!(cfg, s.config);
        assert_eq!(ch, s.channels);
    }
}

#[test]
fn scenario_errors_name_the_line() {
    let s = scenario(2, Mode::FE);
    let text = write_scenario(&s.config, &s.channels);
    let broken = text.replacen("matrix G", "matrix X", 1);
    match read_scenario(&broken) {
        Err(SimError::Parse { line, msg }) => {
            assert!(line > 1);
            assert!(msg.contains("`G`"), "{msg}");
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
    let truncated = &text[..text.len() / 2];
    assert!(read_scenario(truncated).is_err());
    assert!(read_scenario(&format!("{text} extra")).is_err());
}

#[test]
fn conic_programs_round_trip() {
    for mode in [Mode::FE, Mode::HT, Mode::FM] {
        let s = scenario(4, mode);
        let pr = Problem::new(s.config.clone(), s.channels.clone()).unwrap();
        let init = pr.initial_point(0);
        for p in [passive_program(&pr, &init, 0.01), active_program(&pr, &init)] {
            let text = write_program(&p);
            assert_eq!(read_program(&text).unwrap(), p);
        }
    }
}

#[test]
fn conic_program_rejects_bad_tables() {
    let s = scenario(2, Mode::FE);
    let pr = Problem::new(s.config, s.channels).unwrap();
    let text = write_program(&active_program(&pr, &pr.initial_point(0)));
    assert!(read_program(&text.replacen("soc ", "cone ", 1)).is_err());
    let rows_line = text.lines().nth(1).unwrap().to_string();
    assert!(read_program(&text.replacen(&rows_line, "vars 1  rows 1", 1)).is_err());
}
