use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn qrmark(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrmark"))
        .args(args)
        .env_remove("QRMARK_THREADS")
        .output()
        .expect("spawn qrmark")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn json_file(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).expect("report")).expect("json")
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

/// Synthesizes `n` images and watermarks them with key seed 7.
fn watermarked(dir: &TempDir, n: usize) -> (String, String) {
    let orig = p(dir, "orig");
    let wm = p(dir, "wm");
    let n = n.to_string();
    assert_eq!(code(&qrmark(&["synth", "--out", &orig, "--count", &n, "--width", "200", "--height", "180", "--seed", "5"])), 0);
    assert_eq!(code(&qrmark(&["embed", "--input", &orig, "--output", &wm, "--key-seed", "7", "--report", &p(dir, "embed.json")])), 0);
    (orig, wm)
}

#[test]
fn help_exits_zero_and_lists_subcommands() {
    let o = qrmark(&["--help"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    for cmd in ["embed", "attack", "detect", "rs", "profile", "schedule", "simulate", "bench"] {
        assert!(text.contains(cmd), "help lacks {cmd}");
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&qrmark(&["--no-such-flag"])), 2);
    assert_eq!(code(&qrmark(&["detect", "--input", ".", "--bogus"])), 2);
    assert_eq!(code(&qrmark(&[])), 2);
    assert_eq!(code(&qrmark(&["rs", "encode", "--profile", "gf99-1-1", "--msg", "00"])), 2);
}

#[test]
fn rs_encode_emits_sixty_bit_systematic_codeword() {
    let msg = "0123456789ab";
    let o = qrmark(&["rs", "encode", "--profile", "gf16-15-12", "--msg", msg]);
    assert_eq!(code(&o), 0);
    let cw = stdout(&o).trim().to_string();
    assert_eq!(cw.len() * 4, 60);
    assert!(cw.starts_with(msg));

    let clean = qrmark(&["rs", "decode", "--word", &cw]);
    assert_eq!(stdout(&clean).trim(), format!("{msg} errors_corrected=0"));

    // one corrupted symbol (hex digit = 4-bit symbol) in the parity part
    let mut bad: Vec<char> = cw.chars().collect();
    bad[13] = if bad[13] == 'f' { '0' } else { 'f' };
    let bad: String = bad.into_iter().collect();
    let fixed = qrmark(&["rs", "decode", "--word", &bad]);
    assert_eq!(code(&fixed), 0);
    assert_eq!(stdout(&fixed).trim(), format!("{msg} errors_corrected=1"));
}

#[test]
fn rs_decode_failure_is_an_item_failure() {
    let o = qrmark(&["rs", "encode", "--msg", "000000000000"]);
    let mut w: Vec<char> = stdout(&o).trim().chars().collect();
    // three corrupted symbols exceed t = 1; either decoding fails or it lands
    // on another codeword
    for i in [0, 5, 9] {
        w[i] = 'f';
    }
    let w: String = w.into_iter().collect();
    let d = qrmark(&["rs", "decode", "--word", &w]);
    assert!(code(&d) == 1 || !stdout(&d).starts_with("000000000000"));
}

#[test]
fn embed_then_detect_reaches_bit_accuracy() {
    let dir = TempDir::new().unwrap();
    let (orig, wm) = watermarked(&dir, 4);
    let report = p(&dir, "r.json");
    let o = qrmark(&["detect", "--input", &wm, "--key-seed", "7", "--originals", &orig, "--report", &report]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json_file(Path::new(&report));
    assert_eq!(r["schema"], 1);
    let agg = &r["result"]["aggregate"];
    assert!(agg["bit_accuracy"].as_f64().unwrap() >= 0.99);
    assert_eq!(agg["tpr"].as_f64().unwrap(), 1.0);
    assert_eq!(agg["psnr_pairs"], 4);
    assert!(agg["mean_psnr"].as_f64().unwrap() > 25.0);
    assert_eq!(r["result"]["records"].as_array().unwrap().len(), 4);
    assert!(r["result"]["latency_histogram"]["decode"].is_array());
}

#[test]
fn wrong_key_does_not_verify() {
    let dir = TempDir::new().unwrap();
    let (_, wm) = watermarked(&dir, 2);
    let o = qrmark(&["detect", "--input", &wm, "--key-seed", "8", "--deterministic"]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["result"]["aggregate"]["verified"], 0);
}

#[test]
fn ingest_is_lexicographic_and_reports_corrupt_files() {
    let dir = TempDir::new().unwrap();
    let (_, wm) = watermarked(&dir, 3);
    fs::write(Path::new(&wm).join("img_0001b.ppm"), b"P6\n4 4\n255\nshort").unwrap();
    fs::write(Path::new(&wm).join("notes.txt"), b"ignored").unwrap();
    let o = qrmark(&["detect", "--input", &wm, "--key-seed", "7", "--deterministic"]);
    assert_eq!(code(&o), 1);
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let files: Vec<String> = r["result"]["records"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| Path::new(x["file"].as_str().unwrap()).file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(files, ["img_0000.ppm", "img_0001.ppm", "img_0002.ppm"]);
    let errors = r["result"]["errors"].as_array().unwrap();
    assert_eq!(errors.len(), 1);
    assert!(errors[0]["file"].as_str().unwrap().ends_with("img_0001b.ppm"));
}

#[test]
fn empty_directory_warns_and_succeeds() {
    let dir = TempDir::new().unwrap();
    let empty = p(&dir, "empty");
    fs::create_dir(&empty).unwrap();
    let o = qrmark(&["detect", "--input", &empty]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(r["result"]["records"].as_array().unwrap().is_empty());
}

#[test]
fn missing_input_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&qrmark(&["detect", "--input", &p(&dir, "absent")])), 2);
}

#[test]
fn deterministic_reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let (_, wm) = watermarked(&dir, 3);
    let runs: Vec<Vec<&str>> = vec![
        vec!["detect", "--input", &wm, "--key-seed", "7", "--seed", "11", "--deterministic"],
        vec!["detect", "--input", &wm, "--key-seed", "7", "--cache", "off", "--deterministic"],
        vec!["rs", "encode", "--msg", "fedcba987654", "--deterministic"],
    ];
    for args in runs {
        let a = qrmark(&args);
        let b = qrmark(&args);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let r: Value = serde_json::from_str(&stdout(&qrmark(&["detect", "--input", &wm, "--deterministic"]))).unwrap();
    assert!(r.get("created_unix").is_none());
    assert!(r["result"].get("latency_histogram").is_none());
}

#[test]
fn rerun_reproduces_the_result() {
    let dir = TempDir::new().unwrap();
    let (_, wm) = watermarked(&dir, 3);
    let first = p(&dir, "first.json");
    let second = p(&dir, "second.json");
    assert_eq!(code(&qrmark(&["detect", "--input", &wm, "--key-seed", "7", "--tile-size", "32", "--deterministic", "--report", &first])), 0);
    assert_eq!(code(&qrmark(&["rerun", &first, "--report", &second])), 0);
    let (a, b) = (json_file(Path::new(&first)), json_file(Path::new(&second)));
    assert_eq!(a["result"], b["result"]);
    assert_eq!(b["config"]["command"]["tile_size"], 32);
    assert_eq!(b["config"]["deterministic"], true);
}

#[test]
fn env_threads_override_default_workers() {
    let dir = TempDir::new().unwrap();
    let (_, wm) = watermarked(&dir, 1);
    let o = Command::new(env!("CARGO_BIN_EXE_qrmark"))
        .args(["detect", "--input", &wm, "--deterministic"])
        .env("QRMARK_THREADS", "3")
        .output()
        .unwrap();
    let r: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["config"]["command"]["rs_workers"], 3);
}

#[test]
fn attack_outputs_follow_suite_labels() {
    let dir = TempDir::new().unwrap();
    let (_, wm) = watermarked(&dir, 1);
    let suite = p(&dir, "suite.json");
    fs::write(&suite, r#"[{"op": "blur"}, {"op": "brightness", "params": [0.5, 2]}]"#).unwrap();
    let out = p(&dir, "att");
    assert_eq!(code(&qrmark(&["attack", "--input", &wm, "--output", &out, "--suite", &suite, "--report", &p(&dir, "a.json")])), 0);
    let mut names: Vec<String> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    assert_eq!(names, ["img_0000__BL.ppm", "img_0000__BR-0.5.ppm", "img_0000__BR-2.ppm"]);

    fs::write(&suite, r#"[{"op": "brightness", "param": -1}]"#).unwrap();
    assert_eq!(code(&qrmark(&["attack", "--input", &wm, "--output", &out, "--suite", &suite])), 2);
}

#[test]
fn schedule_and_simulate_from_a_profile_file() {
    let dir = TempDir::new().unwrap();
    let prof = p(&dir, "profile.json");
    fs::write(&prof, r#"{"t": [4.0, 16.0, 2.0], "u": [1.0, 1.0, 1.0], "b0": 16}"#).unwrap();
    let sched = p(&dir, "schedule.json");
    let o = qrmark(&["schedule", "--profile", &prof, "--batch", "64", "--streams", "8", "--tasks", "12", "--tile-sizes", "32,64", "--report", &sched]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json_file(Path::new(&sched));
    let s: Vec<u64> = r["result"]["plan"]["s"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert!(s.iter().sum::<u64>() <= 8 && s.iter().all(|&x| x >= 1));
    // the slowest stage gets the most streams
    assert_eq!(s.iter().max(), Some(&s[1]));
    let placed: usize = r["result"]["schedule"]["streams"]["streams"].as_array().unwrap().iter().map(|v| v.as_array().unwrap().len()).sum();
    assert_eq!(placed, 12);

    let trace = p(&dir, "trace.csv");
    let sim = p(&dir, "sim.json");
    let o = qrmark(&["simulate", "--plan", &sched, "--profile", &prof, "--batch", "64", "--trace", &trace, "--report", &sim]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&trace).unwrap();
    assert_eq!(csv.lines().next(), Some("time,stream,stage,batch,kind"));
    let r = json_file(Path::new(&sim));
    assert_eq!(r["result"]["sim"]["events"].as_u64().unwrap() as usize, csv.lines().count() - 1);
    assert!(r["result"]["sim"]["makespan_ns"].as_u64().unwrap() > 0);

    assert_eq!(code(&qrmark(&["schedule", "--profile", &prof, "--streams", "2"])), 2);
    assert_eq!(code(&qrmark(&["schedule", "--profile", &prof, "--mem-cap", "0"])), 2);
}

#[test]
fn profile_then_bench_writes_table() {
    let dir = TempDir::new().unwrap();
    let (_, wm) = watermarked(&dir, 2);
    let prof = p(&dir, "p.json");
    assert_eq!(code(&qrmark(&["profile", "--input", &wm, "--warmup", "1", "--report", &prof])), 0);
    let r = json_file(Path::new(&prof));
    assert_eq!(r["result"]["b0"], 2);
    assert_eq!(r["result"]["t"].as_array().unwrap().len(), 3);

    let table = p(&dir, "bench.csv");
    let o = qrmark(&["bench", "--input", &wm, "--batch-sizes", "1,2", "--csv", &table, "--deterministic"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&table).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("label,batch,workers,wall_ms,latency_ms,throughput"));
    assert_eq!(lines.count(), 2);
}
