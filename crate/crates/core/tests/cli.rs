use std::fs;
use std::path::Path;

use jointsel::cli::run_with;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("jointsel").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn synth_fit_predict_rank_cv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (data, model, planted) = (p(d, "data.csv"), p(d, "model.txt"), p(d, "planted.csv"));
    let (code, out, err) = run(&[
        "synth", "--out", &data, "--n-negative", "60", "--n-positive", "20", "--d", "12",
        "--support", "3", "--seed", "4", "--planted-out", &planted,
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("80 samples"));
    assert!(fs::read_to_string(&planted).unwrap().starts_with("index,name,w,v\n"));
    let before = fs::read(&data).unwrap();

    let (code, out, err) = run(&["fit", "--data", &data, "--lambda", "0.5", "--out", &model]);
    assert_eq!(code, 0, "{err}");
    let trace: Vec<f64> = out.lines().map(|l| l.parse().unwrap()).collect();
    assert!(!trace.is_empty());
    assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-9));

    let preds = p(d, "pred.csv");
    let (code, _, err) = run(&["predict", "--model", &model, "--data", &data, "--out", &preds]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(&preds).unwrap();
    assert!(text.starts_with("id,label_pred,score,time_pred\n"));
    assert_eq!(text.lines().count(), 81);

    let (report, freq) = (p(d, "cv.csv"), p(d, "freq.csv"));
    let (code, summary, err) = run(&[
        "cv", "--data", &data, "--grid", "0.1,1", "--folds", "3", "--repeats", "2", "--out", &report,
        "--freq-out", &freq,
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(!summary.is_empty());
    assert_eq!(fs::read_to_string(&report).unwrap().lines().count(), 1 + 2 * 3 * 2);

    let (code, ranking, err) = run(&["rank", "--model", &model, "--freq", &freq]);
    assert_eq!(code, 0, "{err}");
    let mut lines = ranking.lines();
    assert_eq!(lines.next(), Some("rank,index,name,row_norm,selection_count,selection_total"));
    assert_eq!(lines.count(), 12);

    assert_eq!(fs::read(&data).unwrap(), before, "inputs must not change");
}

#[test]
fn cv_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = p(d, "data.csv");
    assert_eq!(run(&["synth", "--out", &data, "--n-negative", "30", "--n-positive", "12", "--d", "6", "--support", "2", "--plain"]).0, 0);
    let mut outputs = Vec::new();
    for (i, jobs) in ["1", "2"].iter().enumerate() {
        let (report, summary) = (p(d, &format!("r{i}.csv")), p(d, &format!("s{i}.txt")));
        let (code, _, err) = run(&[
            "cv", "--data", &data, "--grid", "0.01,1,100", "--folds", "3", "--repeats", "2", "--jobs", jobs,
            "--seed", "9", "--out", &report, "--summary", &summary,
        ]);
        assert_eq!(code, 0, "{err}");
        outputs.push((fs::read(&report).unwrap(), fs::read(&summary).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = p(dir.path(), "nope.csv");
    let model = p(dir.path(), "m.txt");
    let (code, _, err) = run(&["fit", "--data", &missing, "--out", &model]);
    assert_eq!(code, 2);
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("nope.csv"));

    let bad = p(dir.path(), "bad.csv");
    fs::write(&bad, "id,f_1,label,time_days\n1,0.5,2,NA\n2,1,1,1\n").unwrap();
    let (code, _, err) = run(&["fit", "--data", &bad, "--out", &model]);
    assert_eq!(code, 2);
    assert!(err.contains("line 2"), "{err}");

    assert_eq!(run(&["fit", "--data", &bad]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["fit", "--data", &bad, "--out", &model, "--lambda", "-1"]).0, 1);
    assert_eq!(run(&["--help"]).0, 0);
}
