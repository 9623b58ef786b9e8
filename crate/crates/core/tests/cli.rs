use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freqperm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Non-comment lines of the output.
fn body(o: &Output) -> Vec<String> {
    stdout(o)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

#[test]
fn encode_and_decode() {
    let o = run(&["encode", "--m", "4", "--symbol", "5"]);
    assert!(o.status.success());
    assert_eq!(body(&o), vec!["0 3 2 1"]);
    assert!(stdout(&o).contains("# m = 4"));

    let o = run(&["decode", "--perm", "0 3 2 1"]);
    assert_eq!(body(&o), vec!["5"]);
    let o = run(&["decode", "--perm", "3,2,1,0"]);
    assert_eq!(body(&o), vec!["23"]);
}

#[test]
fn bit_mode_round_trip() {
    let o = run(&["encode", "--m", "5", "--bits", "50"]);
    assert!(o.status.success());
    let perm = body(&o)[0].clone();
    let o = run(&["decode", "--perm", &perm, "--bit-mode"]);
    assert_eq!(body(&o), vec!["50"]);
    // 5! = 120 gives 6 bits per block.
    let o = run(&["encode", "--m", "5", "--bits", "64"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn detect_golden_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("golden.csv");
    fs::write(&path, "# rows: slots, columns: tones\n-4,-3,-2,-6\n-2,1,0,-4\n4,-2,5,-3\n5,4,-4,3\n")
        .unwrap();
    for receiver in ["hungarian", "exhaustive"] {
        let o = run(&["detect", "--matrix", path.to_str().unwrap(), "--receiver", receiver]);
        assert!(o.status.success());
        assert_eq!(body(&o), vec!["2 1 0 3"]);
        assert!(stdout(&o).contains("# objective = 6"));
    }
}

#[test]
fn bounds_two_tone_row() {
    let o = run(&["bounds", "--m", "2", "--n", "1", "--channel", "awgn", "--snr-db", "0"]);
    assert!(o.status.success());
    let rows = body(&o);
    assert_eq!(rows[0], "snr_db,ub,nn,channel,M,N,K");
    let f: Vec<&str> = rows[1].split(',').collect();
    let ub: f64 = f[1].parse().unwrap();
    let nn: f64 = f[2].parse().unwrap();
    assert!((ub - 0.158_655).abs() < 1e-6);
    assert_eq!(ub, nn);
    assert_eq!(&f[3..], ["awgn", "2", "1", "0"]);
}

#[test]
fn bounds_clamp_and_rician() {
    let o = run(&["bounds", "--m", "8", "--snr-db", "-10", "--clamp"]);
    let row = body(&o)[1].clone();
    assert_eq!(row.split(',').nth(1).unwrap().parse::<f64>().unwrap(), 1.0);

    let o = run(&[
        "bounds", "--m", "4", "--n", "4", "--channel", "rician", "--rician-k", "1", "--snr-db",
        "0:5:10",
    ]);
    assert!(o.status.success());
    assert_eq!(body(&o).len(), 4);

    let o = run(&[
        "bounds", "--m", "4", "--n", "4", "--channel", "rician", "--rician-k", "4", "--snr-db",
        "0", "--j-max", "2",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_is_reproducible_across_workers() {
    let args = [
        "simulate", "--m", "4", "--n", "2", "--channel", "rician", "--rician-k", "1", "--snr-db",
        "0,4", "--trials", "20000", "--seed", "9",
    ];
    let a = run(&[&args[..], &["--workers", "1"]].concat());
    let b = run(&[&args[..], &["--workers", "8"]].concat());
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let rows = body(&a);
    assert_eq!(
        rows[0],
        "snr_db,bler,ci_lo,ci_hi,trials,errors,M,N,channel,K,receiver,mode,seed"
    );
    assert_eq!(rows.len(), 3);
}

#[test]
fn simulate_config_file_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.cfg");
    fs::write(&cfg, "m = 3\nn_antennas = 2\nchannel = rayleigh\nsnr_db_list = 0,10\ntrials = 2000\nseed = 3\n")
        .unwrap();
    let out = dir.path().join("out.csv");
    let o = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--trials",
        "1000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("# trials = 1000"));
    assert!(text.contains("# channel = rayleigh"));
    let row = text.lines().rfind(|l| !l.starts_with('#')).unwrap();
    assert!(row.starts_with("10,"));
    assert!(row.contains(",1000,"));

    fs::write(&cfg, "m = 3\nbogus = 1\n").unwrap();
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--snr-db", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn af_grid_output() {
    let o = run(&["af", "--m", "4", "--tau-points", "5", "--doppler-points", "3", "--workers", "2"]);
    assert!(o.status.success());
    let rows = body(&o);
    assert_eq!(rows[0], "tau,omega_rad_s,magnitude");
    assert_eq!(rows.len(), 1 + 15);
    let centre: Vec<f64> = rows[1 + 7].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(centre[0], 0.0);
    assert_eq!(centre[1], 0.0);
    assert!((centre[2] - 1.0).abs() < 1e-12);
    assert!(stdout(&o).contains("# doppler_max_hz = 2"));
}

#[test]
fn crlb_variants_and_singularity() {
    let o = run(&["crlb", "--m", "4", "--snr-db", "0,10", "--centered", "--bt", "1000"]);
    assert!(o.status.success());
    let rows = body(&o);
    assert_eq!(rows[0], "M,t_sec,bt,snr_db,n0,crlb_tau,crlb_omega,variant");
    assert_eq!(rows.len(), 5);
    assert!(rows[1].ends_with(",full") && rows[2].ends_with(",simplified"));

    let o = run(&["crlb", "--m", "4", "--snr-db", "10", "--variant", "full"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not positive definite"));

    let o = run(&["crlb", "--m", "4", "--snr-db", "10", "--variant", "simplified"]);
    assert!(o.status.success());
}

#[test]
fn waveform_samples() {
    let o = run(&["waveform", "--m", "2", "--perm", "1 0", "--oversampling", "8"]);
    assert!(o.status.success());
    let rows = body(&o);
    assert_eq!(rows[0], "t_sec,re,im");
    assert_eq!(rows.len(), 1 + 16);
}

#[test]
fn usage_and_validation_errors() {
    let o = run(&["encode", "--m", "4", "--symbol", "5", "--nope"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(run(&["encode", "--m", "21", "--symbol", "0"]).status.code(), Some(1));
    assert_eq!(run(&["decode", "--perm", "0 0 1"]).status.code(), Some(1));
    assert_eq!(run(&["bounds", "--m", "1", "--snr-db", "0"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn help_lists_units() {
    let o = run(&["simulate", "--help"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for flag in ["--t-sec", "--delta-f-hz", "--f0-hz", "--snr-db", "--rician-k", "--workers", "--out"] {
        assert!(text.contains(flag), "{flag}");
    }
    let o = run(&["af", "--help"]);
    assert!(stdout(&o).contains("--doppler-max-hz"));
    let o = run(&["crlb", "--help"]);
    assert!(stdout(&o).contains("--bt"));
}

#[test]
fn selftest_passes() {
    let o = run(&["selftest"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.matches("PASS").count(), 3);
}
