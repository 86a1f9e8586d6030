use std::path::PathBuf;
use std::process::Command;

use boxnorm_cli::fixtures::OracleConstants;
use boxnorm_cli::scenarios::derive_constants;
use boxnorm_cli::{run, CliError, ExperimentConfig, RunOptions};

fn config(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).unwrap()
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn binary(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_boxnorm")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_reader(csv.as_bytes());
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].to_string()).collect()
}

#[test]
fn every_shipped_config_runs() {
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::load(&path).unwrap();
        let report = run(&cfg, &RunOptions::default()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(report.failures.is_empty(), "{}: {:?}", path.display(), report.failures);
    }
}

#[test]
fn pet_single_square_gives_one_direction() {
    let (code, out, err) = binary(&["pet", "--family", "z^2"]);
    assert_eq!(code, 0, "{err}");
    assert!(err.contains("C_1 = 2*h1"), "{err}");
    assert!(out.contains("\"passed\": true"));
}

#[test]
fn pet_corner_config_lists_seven_directions() {
    let cfg = ExperimentConfig::load(&configs_dir().join("pet_corner.json")).unwrap();
    let report = run(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(report.rows.len(), 7);
    assert!(report.log.contains("descendence: ok"));
}

#[test]
fn malformed_polynomial_reports_position() {
    let (code, _, err) = binary(&["pet", "--family", "z^2 + * 3"]);
    assert_eq!(code, 2);
    assert!(err.contains("position 6"), "{err}");
}

#[test]
fn interval_gowers_norm_matches_parallelogram_count() {
    let n = 6i64;
    let cfg = config(&format!(
        r#"{{"scenario":"norm","functions":[{{"kind":"indicator_cube","n":{n}}}],"n":{n},
            "boxes":[[[{{"dir":[1],"len":{n}}}],[{{"dir":[1],"len":{n}}}]]],"cross_check":true}}"#
    ));
    let report = run(&cfg, &RunOptions::default()).unwrap();
    let inside = |x: i64| (1..=n).contains(&x);
    let mut count = 0u64;
    for x in -4 * n..=4 * n {
        for a in -n..=n {
            for b in -n..=n {
                for a2 in -n..=n {
                    for b2 in -n..=n {
                        if inside(x + a + b) && inside(x + a2 + b) && inside(x + a + b2) && inside(x + a2 + b2) {
                            count += 1;
                        }
                    }
                }
            }
        }
    }
    let expected = count as f64 / ((2 * n + 1) as f64).powi(4);
    let got = report.norm_powers[0].1;
    assert!((got - expected).abs() < 1e-9 * expected, "{got} vs {expected}");
    assert_eq!(report.rows[0][5], "pass");
}

#[test]
fn zero_function_has_zero_norm() {
    let cfg = config(
        r#"{"scenario":"norm","dim":2,"functions":[{"kind":"zero"}],
            "boxes":[[[{"dir":[1,0],"len":3}],[{"dir":[0,1],"len":2}]]]}"#,
    );
    let report = run(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(report.norm_powers[0].1, 0.0);
}

#[test]
fn random_functions_give_small_delta_without_assertions() {
    for file in ["count_op_random.json", "theorem15_random.json"] {
        let cfg = ExperimentConfig::load(&configs_dir().join(file)).unwrap();
        for seed in 0..5 {
            let opts = RunOptions { seed: Some(seed), ..RunOptions::default() };
            let report = run(&cfg, &opts).unwrap();
            let delta = report.delta.unwrap();
            assert!((0.0..0.3).contains(&delta), "{file} seed {seed}: δ = {delta}");
            assert!(report.failures.is_empty());
        }
    }
}

#[test]
fn indicator_functions_give_delta_near_one() {
    // All f_j = 1_[N]^2 and K = 1: δ = ((N - 1)/N)^2.
    let cfg = config(
        r#"{"scenario":"theorem15-check","dim":2,"family":["e1*z^2","e2*z^2"],
            "functions":[{"kind":"indicator_cube","n":32},{"kind":"indicator_cube","n":32},{"kind":"indicator_cube","n":32}],
            "n":32,"k":1}"#,
    );
    let report = run(&cfg, &RunOptions::default()).unwrap();
    assert!((report.delta.unwrap() - (31.0f64 / 32.0).powi(2)).abs() < 1e-12);
    assert!(report.ratios.iter().all(|r| r.1 > 0.9));
}

#[test]
fn structured_sub_box_keeps_both_sides_large() {
    let cfg = config(
        r#"{"scenario":"theorem15-check","dim":2,"family":["e1*z^2","e2*z^2"],
            "functions":[{"kind":"indicator_box","lo":[1,1],"hi":[24,24]},
                         {"kind":"indicator_box","lo":[1,1],"hi":[28,28]},
                         {"kind":"indicator_box","lo":[1,1],"hi":[28,28]}],
            "n":32,"k":2,"t":1}"#,
    );
    let report = run(&cfg, &RunOptions::default()).unwrap();
    let delta = report.delta.unwrap();
    assert!(delta > 0.5, "δ = {delta}");
    assert!(report.ratios.iter().all(|r| r.1 > 0.3), "{:?}", report.ratios);
    assert!(report.failures.is_empty());
}

#[test]
fn theorem_check_refuses_large_scales() {
    let cfg = config(
        r#"{"scenario":"theorem15-check","dim":2,"family":["e1*z^2","e2*z^2"],
            "functions":[{"kind":"zero"},{"kind":"zero"},{"kind":"zero"}],"n":100,"k":2}"#,
    );
    let err = run(&cfg, &RunOptions::default()).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn concatenation_example_box_shape() {
    let cfg = ExperimentConfig::load(&configs_dir().join("concat_example.json")).unwrap();
    let report = run(&cfg, &RunOptions::default()).unwrap();
    // H = M = N^{1/3} = 3: E = e1·[±N] + e2·[±N^{2/3}].
    assert_eq!(report.rows[0][0], "(1,0)*[±27] + (0,1)*[±9]");
    assert!(report.ratios.iter().all(|r| r.1 > 0.0));
}

#[test]
fn concatenation_of_random_function_is_small() {
    let cfg = config(
        r#"{"scenario":"concat-check","dim":2,"seed":4,"direction":"e1*h1*h2 + e2*h1",
            "functions":[{"kind":"random_pm1","n":27}],"n":27,"h":3,"m":3}"#,
    );
    let structured = run(&ExperimentConfig::load(&configs_dir().join("concat_example.json")).unwrap(), &RunOptions::default()).unwrap();
    let report = run(&cfg, &RunOptions::default()).unwrap();
    assert!(report.ratios[0].1 < 0.5 * structured.ratios[0].1, "{:?}", report.ratios);
}

#[test]
fn linear_sweep_has_finite_ratios() {
    let (code, out, err) = binary(&["equidist-sweep", "--config", configs_dir().join("equidist_linear.json").to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let ratios = column(&out, "ratio");
    assert_eq!(ratios.len(), 6 * 6 * 6);
    assert!(ratios.iter().all(|r| r.parse::<f64>().unwrap().is_finite()));
}

#[test]
fn empty_grid_gives_header_only() {
    let cfg = config(r#"{"scenario":"equidist-sweep","sweep":{"kind":"linear","ells":[2],"max_h":0,"max_m":4}}"#);
    let report = run(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(report.to_csv(), "scenario,seed,sweep,max_h,max_m,ell,h,m,target,count,bound,ratio\n");
}

#[test]
fn sample_mode_is_reproducible() {
    let cfg = ExperimentConfig::load(&configs_dir().join("equidist_multilinear.json")).unwrap();
    let opts = RunOptions { exact: false, samples: 300, seed: Some(17), ..RunOptions::default() };
    let a = run(&cfg, &opts).unwrap().to_csv();
    let b = run(&cfg, &opts).unwrap().to_csv();
    assert_eq!(a, b);
    let other = RunOptions { seed: Some(18), ..opts };
    assert_ne!(a, run(&cfg, &other).unwrap().to_csv());
}

#[test]
fn frozen_constants_match_a_fresh_derivation() {
    let cfg = ExperimentConfig::load(&configs_dir().join("fixtures.json")).unwrap();
    let (derived, _) = derive_constants(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(derived, OracleConstants::frozen().unwrap());
}

#[test]
fn exit_codes() {
    let dir = std::env::temp_dir().join(format!("boxnorm-exit-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"scenario":"norm","n":-1}"#).unwrap();
    assert_eq!(binary(&["norm", "--config", bad.to_str().unwrap()]).0, 2);

    let wrong = configs_dir().join("pet_corner.json");
    assert_eq!(binary(&["norm", "--config", wrong.to_str().unwrap()]).0, 2);

    // K^2 far beyond N: δ = 1 but the f_0 norm is tiny.
    let fail = dir.join("fail.json");
    std::fs::write(
        &fail,
        r#"{"scenario":"theorem15-check","dim":2,"family":["e1*z^2","e2*z^2"],
            "functions":[{"kind":"indicator_cube","n":8},{"kind":"padded_constant","n":8},{"kind":"padded_constant","n":8}],
            "n":8,"k":4,"targets":[0]}"#,
    )
    .unwrap();
    assert_eq!(binary(&["theorem15-check", "--config", fail.to_str().unwrap()]).0, 1);

    let norm = configs_dir().join("norm_interval.json");
    assert_eq!(binary(&["norm", "--config", norm.to_str().unwrap(), "--max-states", "5"]).0, 3);
    assert_eq!(binary(&["norm", "--config", norm.to_str().unwrap()]).0, 0);

    let out = dir.join("out.csv");
    let (code, stdout, _) = binary(&["norm", "--config", norm.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("scenario,seed,dim"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn cap_errors_map_to_exit_code_three() {
    let e: CliError = boxnorm_core::Error::CapExceeded { size: 10, limit: 5 }.into();
    assert_eq!(e.exit_code(), 3);
    let e: CliError = boxnorm_core::Error::InvalidArgument("x".into()).into();
    assert_eq!(e.exit_code(), 2);
}
