use std::path::PathBuf;
use std::process::{Command, Output};
use surfest::configcount::count_configurations;
use surfest::experiments::t_schedule;
use surfest::geometry::parse_shape;
use surfest::lattice::digitize;

fn surfest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surfest"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn digitize_then_count_matches_in_process() {
    let file = scratch("ball.img");
    let o = surfest(&[
        "digitize",
        "--shape",
        "ball:r=1",
        "--t",
        "0.1",
        "--shift",
        "0.25,0.5,0.75",
        "--out",
        file.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = surfest(&["count", "--image", file.to_str().unwrap(), "--n", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let solid = parse_shape("ball:r=1").unwrap();
    let img = digitize(&solid, 0.1, &[0.25, 0.5, 0.75], 1).unwrap();
    assert_eq!(stdout(&o), count_configurations(&img, 2).unwrap().to_csv());
}

#[test]
fn naive_and_fast_count_agree() {
    let args = [
        "count",
        "--shape",
        "ball:r=1,d=2",
        "--t",
        "0.05",
        "--shift",
        "0.1,0.9",
        "--n",
        "3",
    ];
    let fast = surfest(&args);
    let mut naive_args = args.to_vec();
    naive_args.push("--naive");
    let naive = surfest(&naive_args);
    assert!(fast.status.success() && naive.status.success());
    assert_eq!(fast.stdout, naive.stdout);
}

#[test]
fn estimate_prints_one_result_line() {
    let o = surfest(&[
        "estimate",
        "--shape",
        "box:1,1,1",
        "--t",
        "0.25",
        "--shift",
        "0,0,0",
        "--weights",
        "default",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    assert!(
        out.starts_with("value=") && out.contains(" t=0.25 ") && out.contains("provenance="),
        "{out}"
    );
}

#[test]
fn aligned_box_sweep_has_zero_std() {
    let o = surfest(&[
        "sweep",
        "--shape",
        "box:1,1,1",
        "--t",
        "0.25",
        "--shifts",
        "mc:400",
        "--seed",
        "7",
        "--weights",
        "default",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("t,runs,mean,std,sup,inf"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[1], "400");
    assert_eq!(row[3], "0.0");
    assert_eq!(row[4], row[5]);
}

#[test]
fn curve_uses_schedule_and_is_reproducible() {
    let a = scratch("curve_a.csv");
    let b = scratch("curve_b.csv");
    let run = |out: &PathBuf, threads: &str| {
        surfest(&[
            "curve",
            "--shape",
            "ball:r=1,d=2",
            "--t-max",
            "0.1",
            "--t-min",
            "0.08",
            "--runs",
            "20",
            "--seed",
            "7",
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ])
    };
    assert!(run(&a, "1").status.success());
    assert!(run(&b, "3").status.success());
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let ts: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ts, t_schedule(0.1, 0.999, 0.08).unwrap());
}

#[test]
fn config_file_supplies_flags() {
    let cfg = scratch("sweep.toml");
    std::fs::write(
        &cfg,
        "shape = \"box:1,1,1\"\nt = 0.25\nshifts = \"mc:50\"\nseed = 7\n",
    )
    .unwrap();
    let from_file = surfest(&["sweep", "--config", cfg.to_str().unwrap()]);
    let direct = surfest(&[
        "sweep",
        "--shape",
        "box:1,1,1",
        "--t",
        "0.25",
        "--shifts",
        "mc:50",
        "--seed",
        "7",
    ]);
    assert!(from_file.status.success(), "{}", stderr(&from_file));
    assert_eq!(from_file.stdout, direct.stdout);
    let overridden = surfest(&["sweep", "--config", cfg.to_str().unwrap(), "--t", "0.2"]);
    assert!(stdout(&overridden)
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("0.2,"));
}

#[test]
fn validation_errors_exit_with_one() {
    let o = surfest(&["estimate", "--shape", "blob:3", "--t", "0.1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--shape"), "{}", stderr(&o));

    let bad = scratch("bad_weights.csv");
    std::fs::write(&bad, "index,weight\n1,abc\n").unwrap();
    let o = surfest(&[
        "estimate",
        "--shape",
        "box:1,1",
        "--t",
        "0.1",
        "--weights",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--weights"), "{}", stderr(&o));

    let o = surfest(&[
        "count",
        "--shape",
        "ball:r=1",
        "--t",
        "0.001",
        "--memory-cap-bits",
        "1000000",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--memory-cap-bits"), "{}", stderr(&o));

    let o = surfest(&[
        "sweep", "--shape", "box:1,1", "--t", "0.1", "--shifts", "mc:zero",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--shifts"));

    assert_eq!(surfest(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn help_lists_every_command() {
    let o = surfest(&["--help"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for cmd in [
        "digitize",
        "count",
        "estimate",
        "sweep",
        "curve",
        "cusp",
        "nprime",
        "verify-bounds",
        "calibrate",
    ] {
        assert!(text.contains(cmd), "missing {cmd}");
    }
}

#[test]
fn nprime_and_bounds_commands() {
    let o = surfest(&["nprime", "--shape", "box:1,1", "--r", "10", "--v", "0,0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "r,v,nprime\n10.0,0.0;0.0,16\n");

    let o = surfest(&[
        "nprime",
        "--shape",
        "box:1,1,1",
        "--r",
        "8,16",
        "--shifts",
        "3",
    ]);
    assert_eq!(stdout(&o).lines().count(), 7);

    let o = surfest(&[
        "verify-bounds",
        "--shape",
        "box:1,1",
        "--r",
        "20",
        "--v",
        "0.3,0.7",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("violations=0"));
}

#[test]
fn calibrate_reproduces_shipped_table() {
    let o = surfest(&["calibrate", "--d", "2"]);
    assert!(o.status.success());
    let shipped = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../core/data/weights_d2_n2.csv"
    ))
    .unwrap();
    assert_eq!(stdout(&o), shipped);
}

#[test]
fn cusp_reports_slope() {
    let o = surfest(&[
        "cusp", "--k", "2", "--t-max", "0.05", "--t-min", "0.01", "--ratio", "0.9", "--runs", "20",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o)
        .lines()
        .last()
        .unwrap()
        .starts_with("std envelope slope"));
}

#[test]
fn endpoint_weights_need_explicit_flag() {
    let w = scratch("endpoint_weights.csv");
    std::fs::write(&w, "index,weight\n5,0.5\n15,1.0\n").unwrap();
    let args = [
        "estimate",
        "--shape",
        "box:1,1",
        "--t",
        "0.1",
        "--shift",
        "0.5,0.5",
        "--weights",
        w.to_str().unwrap(),
    ];
    let o = surfest(&args);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--weights"), "{}", stderr(&o));
    let mut allowed = args.to_vec();
    allowed.push("--allow-nonzero-endpoints");
    let o = surfest(&allowed);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn bare_grid_uses_dimension_default() {
    let o = surfest(&[
        "sweep",
        "--shape",
        "ball:r=1,d=2",
        "--t",
        "0.2",
        "--shifts",
        "grid",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("0.2,1024,"));
    let o = surfest(&[
        "sweep", "--shape", "ball:r=1", "--t", "0.25", "--shifts", "grid",
    ]);
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("0.25,512,"));
    let o = surfest(&[
        "curve",
        "--shape",
        "ball:r=1,d=2",
        "--t-max",
        "0.2",
        "--t-min",
        "0.199",
        "--grid",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("0.2,1024,"));
}
