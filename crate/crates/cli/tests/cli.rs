use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn domseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_domseg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn page(id: &str) -> String {
    corpus().join(id).to_string_lossy().into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn matrix_output_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = corpus();
    let mut runs = Vec::new();
    for name in ["a", "b"] {
        let out = tmp.path().join(name);
        let o = domseg(&["matrix", s(&corpus), "--out", s(&out), "--vectors", "1,2,7,13", "--jobs", "3"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let mut files: Vec<_> = fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        files.sort();
        runs.push(
            files
                .iter()
                .map(|f| (f.file_name().unwrap().to_owned(), fs::read(f).unwrap()))
                .collect::<Vec<_>>(),
        );
    }
    assert!(runs[0].len() >= 8);
    assert_eq!(runs[0], runs[1]);
    let reports = fs::read_to_string(tmp.path().join("a/reports.csv")).unwrap();
    assert_eq!(reports.lines().count(), 1 + 8 * 4 * 2);
}

#[test]
fn invalid_config_exits_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let corpus = corpus();
    for extra in [
        vec!["--xi", "1.5"],
        vec!["--vectors", "14"],
        vec!["--algorithms", "kmeans"],
        vec!["--min-samples", "0"],
        vec!["--normalize", "--no-normalize"],
    ] {
        let mut args = vec!["matrix", s(&corpus), "--out", s(&out)];
        args.extend(extra.iter());
        assert_eq!(domseg(&args).status.code(), Some(2), "{extra:?}");
    }
    let config = tmp.path().join("bad.toml");
    fs::write(&config, "unknown-key = 1\n").unwrap();
    let o = domseg(&["matrix", s(&corpus), "--config", s(&config)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("run.toml");
    let out = tmp.path().join("from-config");
    fs::write(
        &config,
        format!(
            "vectors = \"2\"\nalgorithms = [\"hdbscan\"]\nmin_samples = 3\nout = {:?}\n",
            s(&out)
        ),
    )
    .unwrap();
    let o = domseg(&["matrix", &page("01-news-article"), "--config", s(&config)]);
    assert!(o.status.success());
    let reports = fs::read_to_string(out.join("reports.csv")).unwrap();
    assert_eq!(reports.lines().count(), 2);
    assert!(reports.contains(",HDBSCAN,"));

    let flagged = tmp.path().join("from-flag");
    let o = domseg(&[
        "matrix",
        &page("01-news-article"),
        "--config",
        s(&config),
        "--algorithms",
        "optics,hdbscan",
        "--out",
        s(&flagged),
    ]);
    assert!(o.status.success());
    let reports = fs::read_to_string(flagged.join("reports.csv")).unwrap();
    assert_eq!(reports.lines().count(), 3);
}

#[test]
fn majority_failure_exits_with_1() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus_dir = tmp.path().join("corpus");
    for id in ["01-news-article", "02-product-page"] {
        let dir = corpus_dir.join(id);
        fs::create_dir_all(&dir).unwrap();
        for f in ["page.html", "annotations.json"] {
            fs::copy(corpus().join(id).join(f), dir.join(f)).unwrap();
        }
    }
    let out = tmp.path().join("out");
    // visual vectors without layout: every cell is skipped
    let o = domseg(&["matrix", s(&corpus_dir), "--vectors", "5", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let failures = fs::read_to_string(out.join("failures.csv")).unwrap();
    assert_eq!(failures.lines().count(), 1 + 2 * 2);
    assert!(failures.contains("skipped"));

    // half the cells fail, which is not a majority
    let o = domseg(&["matrix", s(&corpus_dir), "--vectors", "2,5", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn synth_cluster_evaluate_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let page_dir = tmp.path().join("grid");
    let o = domseg(&["synth", "--rows", "3", "--cols", "4", "--seed", "7", "--out", s(&page_dir)]);
    assert!(o.status.success());
    for f in ["page.html", "layout.ndjson", "annotations.json"] {
        assert!(page_dir.join(f).is_file());
    }

    let labels = tmp.path().join("labels.csv");
    let o = domseg(&[
        "cluster",
        s(&page_dir),
        "--vector",
        "DI",
        "--algorithm",
        "hdbscan",
        "--min-samples",
        "2",
        "--min-cluster-size",
        "2",
        "--out",
        s(&labels),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&labels).unwrap();
    assert!(text.starts_with("node,label\n"));
    assert_eq!(text.lines().count(), 1 + 24);

    let o = domseg(&[
        "evaluate",
        "--labels",
        s(&labels),
        "--annotations",
        s(&page_dir.join("annotations.json")),
    ]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("rand,count_diff_pct,size_diff_pct"));
    let rand: f64 = lines.next().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((0.0..=1.0).contains(&rand));

    let o = domseg(&["synth", "--rows", "1", "--cols", "4", "--out", s(&page_dir)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn extract_writes_coordinates() {
    let o = domseg(&["extract", &page("01-news-article")]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    let header = stdout.lines().next().unwrap();
    assert_eq!(header, "node,tag,TD,DI,DID,TG,X,Y,TX,TY");
    assert!(stdout.lines().skip(1).all(|l| l.split(',').count() == 10));

    let o = domseg(&["extract", &page("01-news-article"), "--vector", "TD-DI", "--no-normalize"]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("node,TD,DI\n"));
}

#[test]
fn stats_lists_every_page() {
    let o = domseg(&["stats", s(&corpus())]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1 + 8);
    assert!(stdout.starts_with("page,elements,text_nodes,text_chars,"));

    let tmp = tempfile::tempdir().unwrap();
    let o = domseg(&["stats", s(tmp.path())]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 1);
}
