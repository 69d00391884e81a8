use std::fs;
use std::path::Path;
use std::process::Command;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

const BIN: &str = env!("CARGO_BIN_EXE_kdekit");

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Outcome {
    run_with_stdin(args, "")
}

fn run_with_stdin(args: &[&str], input: &str) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("kdekit").chain(args.iter().copied());
    let code = kdekit_cli::run(argv, &mut input.as_bytes(), &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn normal_file(dir: &Path, n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let body: String = v.iter().map(|x| format!("{x}\n")).collect();
    write(dir, "normal.txt", &body)
}

/// (x, value) rows after the header.
fn parse_csv(text: &str, header: &str) -> Vec<(f64, f64)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(header));
    lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect()
}

fn trapezoid(rows: &[(f64, f64)]) -> f64 {
    rows.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0).sum()
}

fn significant_digits(s: &str) -> usize {
    let mantissa = s.split(['e', 'E']).next().unwrap();
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    digits.trim_start_matches('0').len()
}

#[test]
fn kde_on_three_points_gives_401_rows() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "d.txt", "1\n2\n3\n");
    let o = run(&["kde", &f, "--h", "0.5", "--kernel", "epanechnikov"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let rows = parse_csv(&o.stdout, "x,value");
    assert_eq!(rows.len(), 401);
    assert!((rows[0].0 - (1.0 - 1.5)).abs() < 1e-9);
    assert!((rows[400].0 - (3.0 + 1.5)).abs() < 1e-9);
}

#[test]
fn kde_output_integrates_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = normal_file(dir.path(), 300, 1);
    for kernel in ["uniform", "gaussian", "epanechnikov", "biweight", "triweight"] {
        let o = run(&["kde", &f, "--kernel", kernel]);
        assert_eq!(o.code, 0, "{}", o.stderr);
        let mass = trapezoid(&parse_csv(&o.stdout, "x,value"));
        assert!((mass - 1.0).abs() < 1e-3, "{kernel}: {mass}");
    }
}

#[test]
fn numbers_carry_nine_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "d.txt", "0.1\n0.7\n2.9\n");
    let o = run(&["kde", &f, "--h", "0.3"]);
    assert_eq!(o.code, 0);
    for line in o.stdout.lines().skip(1) {
        for field in line.split(',') {
            assert!(significant_digits(field) <= 9, "{field}");
        }
    }
    // 1/3 evaluated as a uniform density of width 3
    let f2 = write(dir.path(), "e.txt", "0\n");
    let o = run(&["kde", &f2, "--h", "1.5", "--kernel", "uniform", "--points", "3", "--from", "0", "--to", "0.5"]);
    assert_eq!(o.stdout.lines().nth(1), Some("0,0.333333333"));
}

#[test]
fn cdf_is_monotone_from_zero_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = normal_file(dir.path(), 200, 2);
    let o = run(&["cdf", &f, "--kernel", "biweight"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let rows = parse_csv(&o.stdout, "x,value");
    assert_eq!(rows.len(), 401);
    assert!(rows.windows(2).all(|w| w[1].1 >= w[0].1));
    assert!(rows[0].1 < 1e-6 && rows[400].1 > 1.0 - 1e-6);
}

#[test]
fn gamma_kde_rejects_negative_data() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let body: String = (0..200).map(|_| { let v: f64 = Exp1.sample(&mut rng); format!("{v}\n") }).collect();
    let f = write(dir.path(), "exp.txt", &body);
    let o = run(&["gamma-kde", &f, "--b", "0.1"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let rows = parse_csv(&o.stdout, "x,value");
    assert_eq!(rows[0].0, 0.0);
    assert!(rows.iter().all(|r| r.1 >= 0.0));

    let bad = write(dir.path(), "neg.txt", "-1\n2\n");
    let o = run(&["gamma-kde", &bad, "--b", "0.1"]);
    assert_eq!(o.code, 1);
    let err: serde_json::Value = serde_json::from_str(o.stderr.trim()).unwrap();
    assert_eq!(err["error"], "domain-violation");
}

#[test]
fn histogram_heights_have_unit_mass() {
    let dir = tempfile::tempdir().unwrap();
    let f = normal_file(dir.path(), 100, 4);
    let o = run(&["hist", &f]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let rows = parse_csv(&o.stdout, "bin_left,height");
    // Sturges: ceil(log2 100) + 1 = 8
    assert_eq!(rows.len(), 8);
    let width = rows[1].0 - rows[0].0;
    let mass: f64 = rows.iter().map(|r| r.1 * width).sum();
    assert!((mass - 1.0).abs() < 1e-6, "{mass}");

    let o = run(&["hist", &f, "--bins", "5", "--origin", "-10", "--width", "4"]);
    let rows = parse_csv(&o.stdout, "bin_left,height");
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), vec![-10.0, -6.0, -2.0, 2.0, 6.0]);
}

#[test]
fn rule_of_thumb_prints_reference_bandwidth() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut v: Vec<f64> = (0..100).map(|_| StandardNormal.sample(&mut rng)).collect();
    // standardise so the sample deviation is exactly one
    let mean = v.iter().sum::<f64>() / 100.0;
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 99.0).sqrt();
    v.iter_mut().for_each(|x| *x = (*x - mean) / sd);
    let body: String = v.iter().map(|x| format!("{x:.17e}\n")).collect();
    let f = write(dir.path(), "z.txt", &body);
    let o = run(&["bandwidth", &f, "--method", "rot"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let h: f64 = o.stdout.trim().parse().unwrap();
    assert!((h - 1.06 * 100f64.powf(-0.2)).abs() < 1e-8, "{h}");
    assert!((h - 0.422).abs() < 1e-3);
}

#[test]
fn every_bandwidth_method_runs() {
    let dir = tempfile::tempdir().unwrap();
    let f = normal_file(dir.path(), 150, 6);
    let cases: &[&[&str]] = &[
        &["--method", "rot"],
        &["--method", "robust"],
        &["--method", "plugin"],
        &["--method", "lscv", "--kernel", "biweight"],
        &["--method", "bcv"],
        &["--method", "lcv"],
        &["--method", "icv", "--alpha", "2.42", "--sigma", "5.06"],
        &["--method", "icv"],
        &["--method", "chan", "--x", "0.5"],
        &["--method", "bootstrap", "--x", "0", "--B", "20", "--seed", "9"],
        &["--method", "sarda", "--kernel", "epanechnikov"],
    ];
    for extra in cases {
        let trace = dir.path().join("trace.csv");
        let mut args = vec!["bandwidth", f.as_str()];
        args.extend_from_slice(extra);
        args.extend_from_slice(&["--trace", trace.to_str().unwrap()]);
        let o = run(&args);
        assert_eq!(o.code, 0, "{extra:?}: {}", o.stderr);
        let h: f64 = o.stdout.trim().parse().unwrap();
        assert!(h > 0.0 && h < 3.0, "{extra:?}: {h}");
        for line in o.stderr.lines() {
            let w: serde_json::Value = serde_json::from_str(line).unwrap();
            let known = ["boundary-solution", "iteration-limit", "non-positive-roughness", "empty-admissible-set"];
            assert!(known.contains(&w["warning"].as_str().unwrap()), "{line}");
        }
        let t = fs::read_to_string(&trace).unwrap();
        assert_eq!(t.lines().next(), Some("h,criterion"));
    }
}

#[test]
fn sarda_boundary_minimum_is_flagged() {
    // with unit weight the distribution-function criterion keeps falling as
    // h shrinks, so the search ends on its lower edge and says so
    let dir = tempfile::tempdir().unwrap();
    let f = normal_file(dir.path(), 150, 6);
    let o = run(&["bandwidth", &f, "--method", "sarda", "--kernel", "epanechnikov", "--lo", "0.1", "--hi", "1"]);
    assert_eq!(o.code, 0);
    assert_eq!(o.stdout.trim(), "0.1");
    let w: serde_json::Value = serde_json::from_str(o.stderr.trim()).unwrap();
    assert_eq!(w["warning"], "boundary-solution");
}

#[test]
fn hsjm_either_selects_or_reports_failure() {
    let dir = tempfile::tempdir().unwrap();
    let f = normal_file(dir.path(), 200, 7);
    let o = run(&["bandwidth", &f, "--method", "hsjm"]);
    match o.code {
        0 => assert!(o.stdout.trim().parse::<f64>().unwrap() > 0.0),
        1 => {
            let err: serde_json::Value = serde_json::from_str(o.stderr.trim()).unwrap();
            assert_eq!(err["error"], "plugin-failure");
        }
        c => panic!("exit {c}"),
    }
}

#[test]
fn icv_with_zero_alpha_matches_lscv() {
    let dir = tempfile::tempdir().unwrap();
    let f = normal_file(dir.path(), 120, 8);
    let a = run(&["bandwidth", &f, "--method", "icv", "--alpha", "0"]);
    let b = run(&["bandwidth", &f, "--method", "lscv"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn icv_needs_sigma_with_nonzero_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let f = normal_file(dir.path(), 50, 9);
    let o = run(&["bandwidth", &f, "--method", "icv", "--alpha", "2"]);
    assert_eq!(o.code, 2);
}

#[test]
fn sizer_writes_map_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let f = normal_file(dir.path(), 400, 10);
    let out = dir.path().join("maps");
    let o = run(&["sizer", &f, "--alpha", "0.05", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let ppm = fs::read(out.join("map.ppm")).unwrap();
    let header = b"P6\n101 21\n255\n";
    assert_eq!(&ppm[..header.len()], header);
    assert_eq!(ppm.len(), header.len() + 101 * 21 * 3);
    let allowed: [&[u8]; 4] = [&[0, 0, 255], &[255, 0, 0], &[160, 32, 240], &[128, 128, 128]];
    assert!(ppm[header.len()..].chunks(3).all(|c| allowed.contains(&c)));

    let csv = fs::read_to_string(out.join("map.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,h,class"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 101 * 21);
    let classes = ["increasing", "decreasing", "indeterminate", "insufficient"];
    assert!(rows.iter().all(|r| classes.contains(&r[2].as_str())));
    // the top-left ppm pixel is the first x at the largest h
    let last_row = &rows[20 * 101];
    let colour = match last_row[2].as_str() {
        "increasing" => [0u8, 0, 255],
        "decreasing" => [255, 0, 0],
        "indeterminate" => [160, 32, 240],
        _ => [128, 128, 128],
    };
    assert_eq!(&ppm[header.len()..header.len() + 3], &colour);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let f = normal_file(dir.path(), 150, 11);
    let boot = ["bandwidth", &f, "--method", "bootstrap", "--x", "0.2", "--B", "30", "--seed", "4"];
    let a = run(&boot);
    let b = run(&boot);
    assert_eq!(a.stdout, b.stdout);
    let mut threaded = boot.to_vec();
    threaded.extend_from_slice(&["--threads", "1"]);
    assert_eq!(run(&threaded).stdout, a.stdout);
    let other_seed = run(&["bandwidth", &f, "--method", "bootstrap", "--x", "0.2", "--B", "30", "--seed", "5"]);
    assert_eq!(other_seed.code, 0);

    let k1 = run(&["kde", &f, "--kernel", "triweight"]);
    let k2 = run(&["kde", &f, "--kernel", "triweight", "--threads", "3"]);
    assert_eq!(k1.stdout, k2.stdout);

    let m1 = dir.path().join("m1");
    let m2 = dir.path().join("m2");
    run(&["sizer", &f, "--out-dir", m1.to_str().unwrap()]);
    run(&["sizer", &f, "--out-dir", m2.to_str().unwrap(), "--threads", "2"]);
    assert_eq!(fs::read(m1.join("map.ppm")).unwrap(), fs::read(m2.join("map.ppm")).unwrap());
    assert_eq!(fs::read(m1.join("map.csv")).unwrap(), fs::read(m2.join("map.csv")).unwrap());
}

#[test]
fn exclude_top_drops_the_largest_values() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "d.txt", "1\n2\n3\n");
    let all = run(&["hist", &f, "--bins", "1"]);
    let trimmed = run(&["hist", &f, "--bins", "1", "--exclude-top", "1"]);
    // one bin starting at the minimum with width equal to the (stretched) range
    let all = parse_csv(&all.stdout, "bin_left,height");
    let trimmed = parse_csv(&trimmed.stdout, "bin_left,height");
    assert!((all[0].1 - 0.5).abs() < 1e-6);
    assert!((trimmed[0].1 - 1.0).abs() < 1e-6);
    let o = run(&["hist", &f, "--exclude-top", "3"]);
    assert_eq!(o.code, 1);
}

#[test]
fn header_and_named_columns() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "h.csv", "income\n1\n2\n3\n");
    assert_eq!(run(&["hist", &f, "--bins", "1"]).code, 0, "the header is only warned about");
    let plain = run(&["kde", &f, "--skip-header", "--h", "1"]);
    assert_eq!(plain.code, 0);
    assert!(plain.stderr.is_empty(), "{}", plain.stderr);

    let g = write(dir.path(), "g.csv", "rank,income\n1,10\n2,20\n3,30\n");
    let by_name = run(&["kde", &g, "--column", "income", "--h", "1"]);
    let by_index = run(&["kde", &g, "--column", "2", "--skip-header", "--h", "1"]);
    assert_eq!(by_name.code, 0, "{}", by_name.stderr);
    assert_eq!(by_name.stdout, by_index.stdout);
    assert_eq!(run(&["kde", &g, "--column", "wealth", "--h", "1"]).code, 1);
}

#[test]
fn whitespace_input_and_stdin() {
    let o = run_with_stdin(&["kde", "-", "--delimiter", "whitespace", "--column", "2", "--h", "1"], "a 1\nb   2\n\tc 3\n");
    assert_eq!(o.code, 0, "{}", o.stderr);
    let file_free = run_with_stdin(&["kde", "--h", "1"], "1\n2\n3\n");
    assert_eq!(o.stdout, file_free.stdout);
}

#[test]
fn unparseable_rows_are_reported_by_line() {
    let o = run_with_stdin(&["kde", "--h", "1"], "1\noops\n3\n\n5\n");
    assert_eq!(o.code, 0);
    let warn: serde_json::Value = serde_json::from_str(o.stderr.lines().next().unwrap()).unwrap();
    assert_eq!(warn["warning"], "unparseable-row");
    assert_eq!(warn["line"], 2);
}

#[test]
fn non_finite_values_and_empty_input_fail() {
    let o = run_with_stdin(&["kde", "--h", "1"], "1\nnan\n");
    assert_eq!(o.code, 1);
    let err: serde_json::Value = serde_json::from_str(o.stderr.trim()).unwrap();
    assert_eq!(err["error"], "parse-failure");
    assert!(err["message"].as_str().unwrap().contains("line 2"));

    let o = run_with_stdin(&["kde", "--h", "1"], "x\ny\n");
    assert_eq!(o.code, 1);
    let err: serde_json::Value = serde_json::from_str(o.stderr.lines().last().unwrap()).unwrap();
    assert_eq!(err["error"], "ingestion-failure");
}

#[test]
fn usage_and_computation_exit_codes() {
    assert_eq!(run(&["kde", "--bogus"]).code, 2);
    assert_eq!(run(&["frobnicate"]).code, 2);
    assert_eq!(run(&["kde", "--kernel", "cosine"]).code, 2);
    let o = run_with_stdin(&["kde", "--h", "-1"], "1\n2\n");
    assert_eq!(o.code, 1);
    let err: serde_json::Value = serde_json::from_str(o.stderr.trim()).unwrap();
    assert_eq!(err["error"], "invalid-bandwidth");
    assert_eq!(run(&["kde", "/no/such/file", "--h", "1"]).code, 1);
    assert_eq!(run(&["--help"]).code, 0);
}

#[test]
fn binary_reports_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "d.txt", "1\n2\n3\n");
    let ok = Command::new(BIN).args(["kde", &f, "--h", "0.5"]).output().unwrap();
    assert!(ok.status.success());
    assert_eq!(String::from_utf8(ok.stdout).unwrap().lines().count(), 402);
    let bad = Command::new(BIN).args(["kde", &f, "--nope"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&bad.stderr).unwrap();
    assert_eq!(err["error"], "usage");
}
