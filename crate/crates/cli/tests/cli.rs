use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_impulse-mud"));
    c.env_remove("IMPULSE_MUD_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn impulse-mud")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

const QUICK_BER: &[&str] = &[
    "ber",
    "--epsilon",
    "0.1",
    "--kappa",
    "100",
    "--snr",
    "0:12:2",
    "--detectors",
    "huber,x",
    "--seed",
    "7",
    "--max-frames",
    "2000",
];

#[test]
fn ber_row_count_and_header() {
    let csv = stdout(QUICK_BER);
    assert!(csv.starts_with("detector,snr_db,frames,errors,ber,ci95\n"));
    let r = rows(&csv);
    assert_eq!(r.len(), 14);
    assert_eq!(r.iter().filter(|r| r[0] == "huber").count(), 7);
    assert_eq!(r.iter().filter(|r| r[0] == "x").count(), 7);
    for row in &r {
        let frames = num(&row[2]);
        let errors = num(&row[3]);
        assert!((num(&row[4]) - errors / frames).abs() < 1e-11);
    }
}

#[test]
fn ber_rejects_bad_epsilon() {
    let out = run(&["ber", "--epsilon", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[0, 1)"), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["ber", "--chips", "30"]).status.code(), Some(2));
    assert_eq!(
        run(&["ber", "--users", "40", "--chips", "31"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["ber", "--snr", "5:0:1"]).status.code(), Some(2));
    assert_eq!(run(&["ber", "--detectors", "mmse"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(&["dump-psi", "--family", "x", "--sigma", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["are", "--kappas", "0.5"]).status.code(), Some(2));
}

#[test]
fn ber_is_byte_identical_across_runs_and_threads() {
    let a = stdout(QUICK_BER);
    let b = stdout(QUICK_BER);
    assert_eq!(a, b);
    let mut threaded = QUICK_BER.to_vec();
    threaded.extend(["--threads", "3"]);
    assert_eq!(a, stdout(&threaded));
}

#[test]
fn seed_from_environment_and_flag_precedence() {
    let base = [
        "ber",
        "--detectors",
        "ls",
        "--snr",
        "0:0:1",
        "--max-frames",
        "3000",
        "--min-errors",
        "100000",
    ];
    let with_env = |seed: &str, extra: &[&str]| {
        let out = bin()
            .env("IMPULSE_MUD_SEED", seed)
            .args(base)
            .args(extra)
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let flag3 = stdout(&[&base[..], &["--seed", "3"]].concat());
    let flag4 = stdout(&[&base[..], &["--seed", "4"]].concat());
    assert_ne!(flag3, flag4);
    assert_eq!(with_env("3", &[]), flag3);
    assert_eq!(with_env("3", &["--seed", "4"]), flag4);
}

#[test]
fn output_file_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ber.csv");
    let mut args = QUICK_BER.to_vec();
    args.extend(["--output", out.to_str().unwrap()]);
    let printed = stdout(&args);
    assert!(printed.is_empty());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv, stdout(QUICK_BER));
    let manifest = std::fs::read_to_string(dir.path().join("ber.csv.manifest")).unwrap();
    for key in [
        "command=ber\n",
        "seed=7\n",
        "epsilon=0.1\n",
        "detectors=huber,x\n",
        "output_sha256=",
    ] {
        assert!(manifest.contains(key), "{key} missing from\n{manifest}");
    }
}

#[test]
fn config_file_sits_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# quick run\nepsilon = 0.1\nkappa = 100\nsnr = 0:12:2\ndetectors = huber,x\nseed = 9\nmax_frames = 2000\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let mut expect = QUICK_BER.to_vec();
    expect[10] = "9";
    assert_eq!(stdout(&["--config", cfg, "ber"]), stdout(&expect));
    assert_eq!(
        stdout(&["--config", cfg, "ber", "--seed", "7"]),
        stdout(QUICK_BER)
    );
    assert_eq!(
        run(&[
            "--config",
            dir.path().join("missing").to_str().unwrap(),
            "ber"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn are_default_grid_has_80_rows() {
    let csv = stdout(&["are"]);
    assert!(csv.starts_with("epsilon,kappa,V_x,V_other,ARE\n"));
    let r = rows(&csv);
    assert_eq!(r.len(), 80);
    for row in &r {
        let ratio = num(&row[3]) / num(&row[2]);
        assert!((ratio - num(&row[4])).abs() < 1e-10 * ratio);
    }
}

#[test]
fn are_verbatim_numerator_at_gaussian_point() {
    let corrected = rows(&stdout(&["are", "--epsilons", "0", "--kappas", "1"]));
    let verbatim = rows(&stdout(&[
        "are",
        "--epsilons",
        "0",
        "--kappas",
        "1",
        "--verbatim-eq9",
    ]));
    // Same denominator, numerators 0.365379 and 1.
    let ratio = num(&verbatim[0][2]) / num(&corrected[0][2]);
    assert!(
        (ratio - 1.0 / 0.365_378_984_274_171_7).abs() < 1e-9,
        "{ratio}"
    );
}

#[test]
fn are_orders_kappa_with_nominal_scale() {
    let r = rows(&stdout(&[
        "are",
        "--epsilons",
        "0.1",
        "--kappas",
        "10,1000",
        "--x-scale",
        "nominal",
    ]));
    assert_eq!(r.len(), 2);
    assert!(num(&r[1][4]) > num(&r[0][4]));
}

#[test]
fn dump_psi_x_table() {
    let csv = stdout(&[
        "dump-psi",
        "--family",
        "x",
        "--sigma",
        "1",
        "--range",
        "-5:5:0.01",
    ]);
    assert!(csv.starts_with("x,rho,psi,psi_prime\n"));
    let r = rows(&csv);
    assert_eq!(r.len(), 1001);
    let (argmax, peak) =
        r.iter()
            .map(|row| (num(&row[0]), num(&row[2])))
            .fold(
                (0.0, f64::MIN),
                |best, p| if p.1 > best.1 { p } else { best },
            );
    assert!((peak - 1.0).abs() < 1e-12);
    assert!((argmax - 1.0).abs() < 1e-9);
}

#[test]
fn dump_psi_huber_clips_at_minimax_threshold() {
    let gamma = impulse_mud::penalty::huber_threshold(0.1).unwrap().k;
    let r = rows(&stdout(&[
        "dump-psi",
        "--family",
        "huber",
        "--epsilon",
        "0.1",
    ]));
    let max = r.iter().map(|row| num(&row[2])).fold(f64::MIN, f64::max);
    assert!((max - gamma).abs() < 1e-10 * gamma, "{max} vs {gamma}");
    let explicit = rows(&stdout(&[
        "dump-psi", "--family", "huber", "--gamma", "0.5", "--range", "-1:1:0.5",
    ]));
    assert_eq!(
        explicit.iter().map(|row| num(&row[2])).collect::<Vec<_>>(),
        vec![-0.5, -0.5, 0.0, 0.5, 0.5]
    );
}

#[test]
fn dump_codes_has_unit_columns() {
    let csv = stdout(&["dump-codes", "--degree", "5", "--users", "5"]);
    assert!(csv.starts_with("s1,s2,s3,s4,s5\n"));
    let r = rows(&csv);
    assert_eq!(r.len(), 31);
    for k in 0..5 {
        let norm: f64 = r.iter().map(|row| num(&row[k]).powi(2)).sum();
        assert!((norm - 1.0).abs() < 1e-14);
    }
    let s = impulse_mud::SpreadingMatrix::m_sequence(5, 5).unwrap();
    for (i, row) in r.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            assert_eq!(num(v), s.entry(i, k));
        }
    }
}

#[test]
fn help_and_version_succeed() {
    assert!(run(&["--help"]).status.success());
    assert!(run(&["--version"]).status.success());
    assert!(Path::new(env!("CARGO_BIN_EXE_impulse-mud")).exists());
}
