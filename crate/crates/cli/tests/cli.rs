use mixgp::benchmarks::{cosine_function, cosine_space};
use mixgp::doe::lhs;
use mixgp::{Data, Point};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn mixgp<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixgp"))
        .args(args)
        .env_remove("MIXGP_SEED")
        .env_remove("MIXGP_JITTER")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        cosine_space().save(dir.path().join("cosine.json")).unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// Cosine training data with `n` LHS points.
    fn data(&self, n: usize) -> PathBuf {
        let pts: Vec<Point> = lhs(&cosine_space(), n, 4).unwrap();
        let ds = Data::from_fn(cosine_space(), pts, |w| cosine_function(w.continuous[0], w.levels[0]).unwrap()).unwrap();
        let path = self.path(&format!("train{n}.csv"));
        ds.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
        path
    }

    fn fit(&self, data: &Path, kernel: &str, extra: &[&str]) -> (Output, PathBuf) {
        let model = self.path(&format!("{kernel}{}.json", extra.join("_")));
        let space = self.path("cosine.json");
        let mut args = vec!["fit", "--space", p(&space), "--data", p(data), "--kernel", kernel, "--out-model", p(&model)];
        args.extend_from_slice(extra);
        (mixgp(&args), model)
    }
}

fn summary_value(out: &str, key: &str) -> f64 {
    out.split_whitespace()
        .find_map(|t| t.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing in {out:?}"))
        .trim_end_matches('s')
        .parse()
        .unwrap()
}

#[test]
fn doe_lhs_and_grid() {
    let f = Fixture::new();
    let space = f.path("cosine.json");
    let out = f.path("lhs.csv");
    let o = mixgp(&["doe", "--space", p(&space), "--n", "98", "--method", "lhs", "--seed", "3", "--out", p(&out)]);
    assert!(o.status.success(), "{o:?}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 99);
    assert_eq!(text.lines().next().unwrap(), "x,c");

    let again = f.path("lhs2.csv");
    mixgp(&["doe", "--space", p(&space), "--n", "98", "--seed", "3", "--out", p(&again)]);
    assert_eq!(text, std::fs::read_to_string(&again).unwrap());

    let g = f.path("grid.csv");
    let o = mixgp(&["doe", "--space", p(&space), "--method", "grid", "--counts", "1000", "--out", p(&g)]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&g).unwrap().lines().count(), 13_001);
    assert!(stdout(&o).contains("13000"));
}

#[test]
fn doe_errors() {
    let f = Fixture::new();
    let o = mixgp(&["doe", "--space", p(&f.path("missing.json")), "--n", "5", "--out", p(&f.path("x.csv"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    assert!(!f.path("x.csv").exists());
    let o = mixgp(&["doe", "--space", p(&f.path("cosine.json")), "--method", "grid", "--counts", "5,5", "--out", p(&f.path("y.csv"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn seed_from_environment() {
    let f = Fixture::new();
    let space = f.path("cosine.json");
    let run = |seed: Option<&str>, name: &str| {
        let out = f.path(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_mixgp"));
        cmd.args(["doe", "--space", p(&space), "--n", "7", "--out", p(&out)]).env_remove("MIXGP_SEED");
        if let Some(s) = seed {
            cmd.env("MIXGP_SEED", s);
        }
        assert!(cmd.output().unwrap().status.success());
        std::fs::read_to_string(out).unwrap()
    };
    let default = run(None, "a.csv");
    let env5 = run(Some("5"), "b.csv");
    assert_ne!(default, env5);
    mixgp(&["doe", "--space", p(&space), "--n", "7", "--seed", "5", "--out", p(&f.path("c.csv"))]);
    assert_eq!(env5, std::fs::read_to_string(f.path("c.csv")).unwrap());
}

#[test]
fn fit_reports_hyperparameter_counts() {
    let f = Fixture::new();
    let data = f.data(98);
    for (kernel, n) in [("ehh", 79), ("fe", 92), ("cr", 14), ("gd", 2)] {
        let (o, model) = f.fit(&data, kernel, &["--starts", "1", "--max-evals", "20"]);
        assert!(o.status.success(), "{o:?}");
        let out = stdout(&o);
        assert_eq!(summary_value(&out, "n_hyper") as usize, n, "{out}");
        assert!(summary_value(&out, "log_likelihood").is_finite());
        assert!(out.contains(&format!("kernel={}", kernel.to_uppercase())));
        assert!(model.exists());
    }
}

#[test]
fn more_starts_do_not_lower_the_likelihood() {
    let f = Fixture::new();
    let data = f.data(40);
    let (one, _) = f.fit(&data, "gd", &["--starts", "1"]);
    let (ten, _) = f.fit(&data, "gd", &["--starts", "10"]);
    assert!(summary_value(&stdout(&ten), "log_likelihood") >= summary_value(&stdout(&one), "log_likelihood"));
}

#[test]
fn fit_errors() {
    let f = Fixture::new();
    let bad = f.path("bad.csv");
    std::fs::write(&bad, "x,c,y\n0.5,1,oops\n").unwrap();
    let (o, model) = f.fit(&bad, "gd", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!model.exists());
    let out_of_bounds = f.path("oob.csv");
    std::fs::write(&out_of_bounds, "x,c,y\n1.5,1,0.0\n0.5,2,1.0\n").unwrap();
    assert_eq!(f.fit(&out_of_bounds, "gd", &[]).0.status.code(), Some(5));
    let o = mixgp(&["fit", "--space", p(&f.path("cosine.json")), "--data", p(&f.data(5)), "--kernel", "nope", "--out-model", "m.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn predict_round_trip() {
    let f = Fixture::new();
    let data = f.data(30);
    let (o, model) = f.fit(&data, "ehh", &["--starts", "2", "--max-evals", "300"]);
    assert!(o.status.success(), "{o:?}");

    let preds = f.path("pred.csv");
    let o = mixgp(&["predict", "--model", p(&model), "--points", p(&data), "--out", p(&preds)]);
    assert_eq!(o.status.code(), Some(2), "training file has a y column, so its header does not match");

    // strip the target column and predict the training points
    let text = std::fs::read_to_string(&data).unwrap();
    let mut pts = String::new();
    let mut ys = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let (head, y) = line.rsplit_once(',').unwrap();
        pts.push_str(head);
        pts.push('\n');
        if i > 0 {
            ys.push(y.parse::<f64>().unwrap());
        }
    }
    let points = f.path("points.csv");
    std::fs::write(&points, &pts).unwrap();
    let o = mixgp(&["predict", "--model", p(&model), "--points", p(&points), "--out", p(&preds)]);
    assert!(o.status.success(), "{o:?}");
    let out = std::fs::read_to_string(&preds).unwrap();
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "x,c,mean,std");
    for (line, y) in lines.zip(&ys) {
        let fields: Vec<&str> = line.split(',').collect();
        let mean: f64 = fields[2].parse().unwrap();
        let std: f64 = fields[3].parse().unwrap();
        assert!((mean - y).abs() <= 1e-6 * (1.0 + y.abs()), "{mean} vs {y}");
        assert!(std >= 0.0);
    }

    // same inputs, same bytes
    let again = f.path("pred2.csv");
    mixgp(&["predict", "--model", p(&model), "--points", p(&points), "--out", p(&again)]);
    assert_eq!(out, std::fs::read_to_string(&again).unwrap());

    let empty = f.path("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let eout = f.path("epred.csv");
    let o = mixgp(&["predict", "--model", p(&model), "--points", p(&empty), "--out", p(&eout)]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&eout).unwrap(), "");

    let oob = f.path("oob.csv");
    std::fs::write(&oob, "x,c\n0.5,14\n").unwrap();
    let o = mixgp(&["predict", "--model", p(&model), "--points", p(&oob), "--out", p(&f.path("o.csv"))]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn export_correlation() {
    let f = Fixture::new();
    let data = f.data(98);
    let (o, model) = f.fit(&data, "gd", &[]);
    assert!(o.status.success());
    let out = f.path("r.csv");
    let o = mixgp(&["export-corr", "--model", p(&model), "--variable", "1", "--out", p(&out)]);
    assert!(o.status.success(), "{o:?}");
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 13);
    let mut off = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[i], 1.0);
        for (j, &v) in row.iter().enumerate() {
            assert!(v >= 0.0);
            if i != j {
                off.push(v.to_bits());
            }
        }
    }
    off.sort();
    off.dedup();
    assert_eq!(off.len(), 1);

    let o = mixgp(&["export-corr", "--model", p(&model), "--variable", "0", "--out", p(&f.path("bad.csv"))]);
    assert_eq!(o.status.code(), Some(5));
    assert!(!f.path("bad.csv").exists());
}

#[test]
fn hh_export_can_go_negative() {
    // levels 9 and 13 are nearly in antiphase, so the fitted HH correlation is negative
    let f = Fixture::new();
    let data = f.data(98);
    let (o, model) = f.fit(&data, "hh", &["--starts", "2", "--max-evals", "2000"]);
    assert!(o.status.success(), "{o:?}");
    let out = f.path("hh.csv");
    assert!(mixgp(&["export-corr", "--model", p(&model), "--variable", "1", "--out", p(&out)]).status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let min = text
        .lines()
        .skip(1)
        .flat_map(|l| l.split(',').skip(1).map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .fold(f64::INFINITY, f64::min);
    assert!(min < 0.0, "smallest HH correlation {min}");
}

#[test]
fn benchmark_commands() {
    let o = mixgp(&["benchmark", "--problem", "dragon-audit"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "relaxed=21 gd=12 cr=21 ehh=47");

    assert_eq!(mixgp(&["benchmark", "--problem", "wing"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.csv");
    let corr = dir.path().join("corr");
    let o = mixgp(&[
        "benchmark", "--problem", "cosine", "--kernels", "gd,cr,ehh", "--doe-size", "98", "--starts", "1",
        "--max-evals", "30", "--out", p(&report), "--corr-dir", p(&corr), "--strict",
    ]);
    assert!(o.status.success(), "{o:?}");
    let text = std::fs::read_to_string(&report).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    for (row, (k, n)) in rows.iter().zip([("GD", "2"), ("CR", "14"), ("EHH", "79")]) {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!((f[1], f[3], f[11]), (k, n, "ok"));
    }
    assert!(corr.join("cosine_EHH_R1.csv").exists());

    let o = mixgp(&["kernel-info", "--space", p(&Fixture::new().path("cosine.json"))]);
    let out = stdout(&o);
    assert!(out.contains("GD 2") && out.contains("CR 14") && out.contains("EHH 79") && out.contains("FE 92"));
}
