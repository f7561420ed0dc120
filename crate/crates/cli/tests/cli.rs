use qforage::env::load_corpus;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn qforage(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qforage"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Generated corpus plus a short training run inside a fresh directory.
struct Run {
    dir: TempDir,
}

impl Run {
    fn new(train_args: &[&str]) -> Run {
        let dir = tempfile::tempdir().unwrap();
        let out = qforage(&["gen-corpus", "--docs", "12", "--seed", "3", "--out", s(dir.path())]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let run = Run { dir };
        let corpus = run.corpus();
        let mut args = vec!["train", "--corpus", s(&corpus), "--seed", "3", "--out", s(run.dir.path())];
        args.extend_from_slice(train_args);
        let out = qforage(&args);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        run
    }

    fn corpus(&self) -> PathBuf {
        self.dir.path().join("corpus.tsv")
    }

    fn checkpoint(&self) -> PathBuf {
        self.dir.path().join("checkpoint.txt")
    }

    fn metrics(&self) -> String {
        std::fs::read_to_string(self.dir.path().join("metrics.tsv")).unwrap()
    }
}

#[test]
fn gen_corpus_is_deterministic_and_loadable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for (out, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        let o = qforage(&["gen-corpus", "--docs", "10", "--patches", "2", "--seed", seed, "--out", s(out)]);
        assert_eq!(code(&o), 0);
        assert!(stdout(&o).contains("10 documents"));
    }
    let read = |p: &Path| std::fs::read_to_string(p.join("corpus.tsv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert!(read(&a).starts_with("# seed=7\n# docs=10\n"));
    assert_eq!(load_corpus(a.join("corpus.tsv")).unwrap().len(), 10);

    let o = qforage(&["gen-corpus", "--out", s(dir.path())]);
    assert_eq!(code(&o), 0);
    assert_eq!(load_corpus(dir.path().join("corpus.tsv")).unwrap().len(), 50);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = qforage(&["gen-corpus", "--docs", "0", "--out", s(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    assert_eq!(code(&qforage(&["train", "--corpus", s(&dir.path().join("missing.tsv"))])), 2);
    assert_eq!(code(&qforage(&["train"])), 2);
    assert_eq!(code(&qforage(&["frobnicate"])), 2);

    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "episodes=10\nlearning_rate=0.1\n").unwrap();
    let o = qforage(&["gen-corpus", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("learning_rate"));
}

#[test]
fn train_is_deterministic_and_echoes_config() {
    let a = Run::new(&["--episodes", "40", "--eval-interval", "20"]);
    let b = Run::new(&["--episodes", "40", "--eval-interval", "20"]);
    assert_eq!(std::fs::read(a.checkpoint()).unwrap(), std::fs::read(b.checkpoint()).unwrap());
    assert_eq!(a.metrics(), b.metrics());
    let metrics = a.metrics();
    assert!(metrics.starts_with("# episodes=40\n"));
    assert!(metrics.contains("# seed=3\n"));
    assert_eq!(metrics.lines().filter(|l| !l.starts_with('#')).count(), 3);
    let cp = std::fs::read_to_string(a.checkpoint()).unwrap();
    assert!(cp.lines().nth(1).unwrap() == "# episodes=40");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# experiment\nepisodes = 30\neval_interval=10\ntemperature=0.2\n").unwrap();
    let run = Run::new(&["--config", s(&cfg), "--episodes", "20"]);
    let m = run.metrics();
    assert!(m.contains("# episodes=20\n"));
    assert!(m.contains("# eval_interval=10\n"));
    assert!(m.contains("# temperature=0.2\n"));
    assert!(m.contains("# lr_actor=0.04\n"));
}

fn final_greedy(metrics: &str) -> String {
    metrics.lines().last().unwrap().split('\t').nth(2).unwrap().to_string()
}

#[test]
fn eval_matches_training_log() {
    let run = Run::new(&["--episodes", "60", "--eval-interval", "25"]);
    let o = qforage(&["eval", "--corpus", s(&run.corpus()), "--checkpoint", s(&run.checkpoint())]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let greedy = out.lines().find_map(|l| l.strip_prefix("greedy_acc\t")).unwrap();
    assert_eq!(greedy, final_greedy(&run.metrics()));
    assert_eq!(out.lines().filter(|l| l.starts_with('d')).count(), 12 + 1);
}

#[test]
fn eval_failures_exit_1() {
    let run = Run::new(&["--episodes", "5"]);
    let broken = run.dir.path().join("broken.txt");
    let text = std::fs::read_to_string(run.checkpoint()).unwrap();
    std::fs::write(&broken, &text[..text.len() / 3]).unwrap();
    let o = qforage(&["eval", "--corpus", s(&run.corpus()), "--checkpoint", s(&broken)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));

    let empty = run.dir.path().join("empty.tsv");
    std::fs::write(&empty, "# no documents\n").unwrap();
    let o = qforage(&["eval", "--corpus", s(&empty), "--checkpoint", s(&run.checkpoint())]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty"));
}

fn numbers(line: &str) -> Vec<f64> {
    line.split('\t').nth(1).unwrap().split(' ').map(|x| x.parse().unwrap()).collect()
}

#[test]
fn inspect_reports_consistent_diagnostics() {
    let run = Run::new(&["--episodes", "30", "--set", "rank=4"]);
    let o = qforage(&["inspect", "--corpus", s(&run.corpus()), "--checkpoint", s(&run.checkpoint()), "--doc", "d002"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.starts_with("document\td002\n"));
    let field = |name: &str| -> Vec<Vec<f64>> {
        out.lines()
            .filter(|l| l.trim_start().starts_with(&format!("{name}\t")))
            .map(|l| numbers(l.trim_start()))
            .collect()
    };
    let pooled = field("pooled");
    assert_eq!(pooled.len(), 3);
    assert!(pooled.iter().all(|p| p.len() == 4));
    for p in field("critic_p") {
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
    let policy: f64 = field("policy").iter().map(|p| p[0]).sum();
    assert!((policy - 1.0).abs() < 1e-10);
    assert!(field("rho_diag").iter().all(|d| d.len() == 12));

    let o = qforage(&["inspect", "--corpus", s(&run.corpus()), "--checkpoint", s(&run.checkpoint()), "--doc", "nope"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn oracle_exit_codes() {
    let o = qforage(&["oracle", "--checks", "projection,born"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 2);
    assert!(out.lines().all(|l| l.starts_with("PASS")));

    let o = qforage(&["oracle", "--checks", "projection", "--perturb", "1e-3"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).starts_with("FAIL\tprojection"));

    assert_eq!(code(&qforage(&["oracle", "--checks", "telepathy"])), 2);
}

#[test]
fn toy_run_reaches_target_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&qforage(&["gen-corpus", "--seed", "7", "--out", s(dir.path())])), 0);
    let corpus = dir.path().join("corpus.tsv");
    let o = qforage(&["train", "--corpus", s(&corpus), "--seed", "7", "--episodes", "2000", "--out", s(dir.path())]);
    assert_eq!(code(&o), 0);
    let metrics = std::fs::read_to_string(dir.path().join("metrics.tsv")).unwrap();
    let acc: f64 = final_greedy(&metrics).parse().unwrap();
    assert!(acc >= 0.9, "final greedy accuracy {acc}");
}
