use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clap::Parser;
use psd_schur::channels::{choi_from_map, LinearMap};
use psd_schur::matcore::{kron, reference_eigenvalues};
use psd_schur::random::{self, SplitMix64};
use psd_schur::states::{bell_state, maximally_mixed, werner_state};
use psd_schur::{ComplexMatrix, SchurParams, C64};
use psd_schur_cli::files::{read_json, read_matrix, write_json, write_matrix, ParamsFile};
use psd_schur_cli::{run, Cli};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_psdschur"))
}

fn exec(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn p(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn put(dir: &TempDir, name: &str, m: &ComplexMatrix) -> PathBuf {
    let path = p(dir, name);
    write_matrix(&path, m).unwrap();
    path
}

fn in_process(args: &[&str]) -> Result<Value, i32> {
    let cli = Cli::try_parse_from(std::iter::once("psdschur").chain(args.iter().copied())).unwrap();
    let mut buf = Vec::new();
    run(cli, &mut buf).map_err(|e| e.exit_code())?;
    Ok(serde_json::from_slice(&buf).unwrap_or(Value::Null))
}

#[test]
fn identity_has_zero_contractions() {
    let dir = TempDir::new().unwrap();
    let input = put(&dir, "id.json", &ComplexMatrix::identity(4));
    let out = p(&dir, "params.json");
    let o = exec(&["parametrize", "--in", s(&input), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let params: ParamsFile = read_json(&out).unwrap();
    assert_eq!(params.diag, vec![1.0; 4]);
    assert!(params
        .gamma
        .iter()
        .all(|g| g.re == 0.0 && g.im == 0.0 && g.defined));
}

#[test]
fn worked_three_by_three() {
    let dir = TempDir::new().unwrap();
    let m = ComplexMatrix::from_real_rows(&[&[1.0, 0.6, 0.3], &[0.6, 1.0, 0.5], &[0.3, 0.5, 1.0]])
        .unwrap();
    let input = put(&dir, "m.json", &m);
    for method in ["direct", "displacement"] {
        let out = p(&dir, &format!("{method}.json"));
        let o = exec(&[
            "parametrize",
            "--in",
            s(&input),
            "--out",
            s(&out),
            "--method",
            method,
        ]);
        assert_eq!(o.status.code(), Some(0));
        let q = read_json::<ParamsFile>(&out).unwrap().to_params().unwrap();
        assert!((q.gamma(0, 1) - C64::new(0.6, 0.0)).norm() < 1e-12);
        assert!((q.gamma(1, 2) - C64::new(0.5, 0.0)).norm() < 1e-12);
        assert!(q.gamma(0, 2).norm() < 1e-12);
    }
}

#[test]
fn indefinite_matrix_exits_two() {
    let dir = TempDir::new().unwrap();
    let m = ComplexMatrix::from_real_rows(&[&[1.0, 0.0, 0.9], &[0.0, 1.0, 0.9], &[0.9, 0.9, 1.0]])
        .unwrap();
    assert!(reference_eigenvalues(&m).unwrap()[0] < 0.0);
    let input = put(&dir, "m.json", &m);
    let o = exec(&[
        "parametrize",
        "--in",
        s(&input),
        "--out",
        s(&p(&dir, "x.json")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("band 2"));
}

#[test]
fn io_and_parse_failures_exit_one() {
    let dir = TempDir::new().unwrap();
    let missing = p(&dir, "missing.json");
    let o = exec(&[
        "parametrize",
        "--in",
        s(&missing),
        "--out",
        s(&p(&dir, "x.json")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let garbage = p(&dir, "garbage.json");
    std::fs::write(&garbage, "{\"rows\": 2}").unwrap();
    let o = exec(&[
        "parametrize",
        "--in",
        s(&garbage),
        "--out",
        s(&p(&dir, "x.json")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = exec(&["parametrize", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn reconstruct_cosine_law_triple() {
    let dir = TempDir::new().unwrap();
    let (th, th1, phi) = (0.7f64, 1.9f64, 2.3f64);
    let mut q = SchurParams::identity(3);
    q.set_gamma(0, 1, C64::new(th.cos(), 0.0)).unwrap();
    q.set_gamma(1, 2, C64::new(th1.cos(), 0.0)).unwrap();
    q.set_gamma(0, 2, C64::new(phi.cos(), 0.0)).unwrap();
    let input = p(&dir, "p.json");
    write_json(&input, &ParamsFile::from_params(&q)).unwrap();
    let out = p(&dir, "m.json");
    let chol = p(&dir, "c.json");
    let o = exec(&[
        "reconstruct",
        "--in",
        s(&input),
        "--out",
        s(&out),
        "--cholesky",
        s(&chol),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let m = read_matrix(&out).unwrap();
    let want = th.cos() * th1.cos() + th.sin() * th1.sin() * phi.cos();
    assert!((m[(0, 2)].re - want).abs() < 1e-12);
    let a = read_matrix(&chol).unwrap();
    assert!((&a.adjoint() * &a).max_abs_diff(&m) < 1e-12);
}

#[test]
fn unimodular_chain_gives_rank_one() {
    let dir = TempDir::new().unwrap();
    let mut q = SchurParams::identity(4);
    for k in 0..3 {
        q.set_gamma(k, k + 1, C64::from_polar(1.0, 0.4 * k as f64))
            .unwrap();
    }
    // entries past a unimodular link carry no information
    for (k, j) in [(0, 2), (1, 3), (0, 3)] {
        q.mask(k, j);
    }
    let input = p(&dir, "p.json");
    write_json(&input, &ParamsFile::from_params(&q)).unwrap();
    let out = p(&dir, "m.json");
    let o = exec(&["reconstruct", "--in", s(&input), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["determinant"], Value::from(0.0));
    let ev = reference_eigenvalues(&read_matrix(&out).unwrap()).unwrap();
    assert!(ev[..3].iter().all(|l| l.abs() < 1e-12));
    assert!((ev[3] - 4.0).abs() < 1e-12);
}

#[test]
fn invalid_params_file_exits_one() {
    let dir = TempDir::new().unwrap();
    let mut f = ParamsFile::from_params(&SchurParams::identity(3));
    f.gamma[0].re = 1.2;
    let input = p(&dir, "p.json");
    write_json(&input, &f).unwrap();
    let o = exec(&[
        "reconstruct",
        "--in",
        s(&input),
        "--out",
        s(&p(&dir, "m.json")),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn state_reports() {
    let dir = TempDir::new().unwrap();
    let mixed = put(&dir, "mixed.json", &maximally_mixed(2));
    let o = exec(&["state", "--in", s(&mixed)]);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout_json(&o);
    assert_eq!(r["pure"], Value::from(false));
    assert!((r["entropy_E"].as_f64().unwrap() + 2f64.ln()).abs() < 1e-15);

    let bell = put(&dir, "bell.json", &bell_state());
    let o = exec(&["state", "--in", s(&bell), "--report"]);
    let r = stdout_json(&o);
    assert_eq!(r["pure"], Value::from(true));
    assert_eq!(r["entropy_E"], Value::from("-inf"));
    assert!(r["entropy_E0"].as_f64().unwrap().abs() < 1e-10);
    assert_eq!(r["pure_vector"].as_array().unwrap().len(), 4);
    assert_eq!(r["params"]["dim"], Value::from(4));

    let mut rng = SplitMix64::new(5);
    let rho = random::density(&mut rng, 3, 3);
    let want = reference_eigenvalues(&rho)
        .unwrap()
        .iter()
        .map(|l| l.ln())
        .sum::<f64>()
        / 3.0;
    let path = put(&dir, "rho.json", &rho);
    let r = stdout_json(&exec(&["state", "--in", s(&path)]));
    assert!((r["entropy_E"].as_f64().unwrap() - want).abs() < 1e-8);

    let not_state = put(&dir, "bad.json", &ComplexMatrix::identity(2));
    assert_eq!(
        exec(&["state", "--in", s(&not_state)]).status.code(),
        Some(2)
    );
}

#[test]
fn channel_commands() {
    let dir = TempDir::new().unwrap();
    let dep = put(
        &dir,
        "dep.json",
        choi_from_map(&LinearMap::depolarizing(2)).matrix(),
    );
    let o = exec(&[
        "channel",
        "--choi",
        s(&dep),
        "--din",
        "2",
        "--dout",
        "2",
        "--capacity",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let cap = stdout_json(&o)["capacity"].as_f64().unwrap();
    assert!((cap - 2f64.ln()).abs() < 1e-12);

    let id = put(
        &dir,
        "id.json",
        choi_from_map(&LinearMap::identity(2)).matrix(),
    );
    let prefix = p(&dir, "k");
    let o = exec(&[
        "channel",
        "--choi",
        s(&id),
        "--din",
        "2",
        "--dout",
        "2",
        "--kraus",
        s(&prefix),
        "--capacity",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout_json(&o);
    assert_eq!(r["kraus_files"].as_array().unwrap().len(), 1);
    assert_eq!(r["capacity"], Value::from("inf"));
    let k = read_matrix(&p(&dir, "k_1.json")).unwrap();
    let scale = k[(0, 0)];
    assert!(k.max_abs_diff(&ComplexMatrix::identity(2).scale(scale)) < 1e-12);
    assert!((scale.norm() - 1.0).abs() < 1e-12);

    let tr = put(
        &dir,
        "t.json",
        choi_from_map(&LinearMap::transpose(2)).matrix(),
    );
    let o = exec(&["channel", "--choi", s(&tr), "--din", "2", "--dout", "2"]);
    assert_eq!(o.status.code(), Some(2));

    let o = exec(&["channel", "--choi", s(&dep), "--din", "3", "--dout", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn separability_commands() {
    let dir = TempDir::new().unwrap();
    for method in ["ppt", "params"] {
        let check = |m: &ComplexMatrix, name: &str| -> bool {
            let path = put(&dir, name, m);
            let o = exec(&[
                "separability",
                "--in",
                s(&path),
                "--dims",
                "2x2",
                "--method",
                method,
            ]);
            assert_eq!(
                o.status.code(),
                Some(0),
                "{}",
                String::from_utf8_lossy(&o.stderr)
            );
            stdout_json(&o)["separable"].as_bool().unwrap()
        };
        assert!(!check(&werner_state(0.5), "w5.json"));
        assert!(check(&werner_state(0.25), "w25.json"));
        let mut rng = SplitMix64::new(9);
        let prod = kron(
            &random::density(&mut rng, 2, 2),
            &random::density(&mut rng, 2, 2),
        );
        assert!(check(&prod, "prod.json"));
    }
    let mut rng = SplitMix64::new(10);
    let rho = random::density(&mut rng, 6, 6);
    let path = put(&dir, "six.json", &rho);
    let o = exec(&["separability", "--in", s(&path), "--dims", "2x3"]);
    assert_eq!(o.status.code(), Some(0));
    let o = exec(&[
        "separability",
        "--in",
        s(&path),
        "--dims",
        "2x3",
        "--method",
        "params",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = exec(&["separability", "--in", s(&path), "--dims", "3x3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn random_is_deterministic_and_valid() {
    let dir = TempDir::new().unwrap();
    let a = exec(&["random", "--kind", "psd", "--dim", "5", "--seed", "42"]);
    let b = exec(&["random", "--kind", "psd", "--dim", "5", "--seed", "42"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let st = p(&dir, "st.json");
    exec(&[
        "random",
        "--kind",
        "state",
        "--dim",
        "3",
        "--seed",
        "7",
        "--out",
        s(&st),
    ]);
    assert_eq!(exec(&["state", "--in", s(&st)]).status.code(), Some(0));

    let ch = p(&dir, "ch.json");
    exec(&[
        "random",
        "--kind",
        "channel",
        "--dim",
        "2",
        "--seed",
        "8",
        "--trace-preserving",
        "--out",
        s(&ch),
    ]);
    let o = exec(&["channel", "--choi", s(&ch), "--din", "2", "--dout", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["trace_preserving"], Value::from(true));
}

#[test]
fn parametrize_reconstruct_pipeline() {
    let dir = TempDir::new().unwrap();
    let input = p(&dir, "in.json");
    let params = p(&dir, "params.json");
    let output = p(&dir, "out.json");
    for seed in 0..100u64 {
        let dim = (2 + seed % 7).to_string();
        let rank = (1 + seed % 9).to_string();
        let seed_s = seed.to_string();
        in_process(&[
            "random",
            "--kind",
            "psd",
            "--dim",
            &dim,
            "--rank",
            &rank,
            "--seed",
            &seed_s,
            "--out",
            s(&input),
        ])
        .unwrap();
        let m = read_matrix(&input).unwrap();
        for method in ["direct", "displacement"] {
            in_process(&[
                "parametrize",
                "--in",
                s(&input),
                "--out",
                s(&params),
                "--method",
                method,
            ])
            .unwrap();
            in_process(&["reconstruct", "--in", s(&params), "--out", s(&output)]).unwrap();
            let back = read_matrix(&output).unwrap();
            assert!(back.max_abs_diff(&m) <= 1e-9, "seed {seed} {method}");
        }
    }
}

#[test]
fn golden_files_match_committed() {
    let dir = TempDir::new().unwrap();
    let o = exec(&["golden", "--out-dir", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let committed = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for name in psd_schur_cli::golden::FILES {
        let a = std::fs::read(dir.path().join(name)).unwrap();
        let b = std::fs::read(committed.join(name)).unwrap();
        assert!(a == b, "{name} differs from the committed copy");
    }
}
