#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output, Stdio};

pub fn bin(name: &str) -> Command {
    let path = match name {
        "dt-sort" => env!("CARGO_BIN_EXE_dt-sort"),
        "dt-merge" => env!("CARGO_BIN_EXE_dt-merge"),
        "dt-label" => env!("CARGO_BIN_EXE_dt-label"),
        "dt-optimise" => env!("CARGO_BIN_EXE_dt-optimise"),
        "campaign-verify" => env!("CARGO_BIN_EXE_campaign-verify"),
        "campaign-stats" => env!("CARGO_BIN_EXE_campaign-stats"),
        "gen-dataset" => env!("CARGO_BIN_EXE_gen-dataset"),
        "est-probe" => env!("CARGO_BIN_EXE_est-probe"),
        "est-train" => env!("CARGO_BIN_EXE_est-train"),
        "est-predict" => env!("CARGO_BIN_EXE_est-predict"),
        "est-validate" => env!("CARGO_BIN_EXE_est-validate"),
        other => panic!("no binary {other}"),
    };
    Command::new(path)
}

/// Runs a tool with arguments, optional stdin, and returns its output.
pub fn run<S: AsRef<std::ffi::OsStr>>(name: &str, args: &[S], stdin: Option<&[u8]>) -> Output {
    use std::io::Write;
    let mut cmd = bin(name);
    cmd.args(args)
        .stdin(if stdin.is_some() {
            Stdio::piped()
        } else {
            Stdio::null()
        })
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    let mut child = cmd.spawn().expect("spawn");
    if let Some(input) = stdin {
        child.stdin.take().unwrap().write_all(input).unwrap();
    }
    child.wait_with_output().unwrap()
}

/// Like [`run`] but panics with stderr unless the tool exits 0.
pub fn ok<S: AsRef<std::ffi::OsStr>>(name: &str, args: &[S], stdin: Option<&[u8]>) -> Output {
    let out = run(name, args, stdin);
    assert!(
        out.status.success(),
        "{name} failed with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn write_words(path: &Path, words: &[u64]) {
    let bytes: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
    std::fs::write(path, bytes).unwrap();
}

pub fn read_words(path: &Path) -> Vec<u64> {
    std::fs::read(path)
        .unwrap()
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect()
}

pub fn s(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

/// Sort, label and optimise `input` through the CLI. Returns the paths of
/// the sorted file, load labels, store labels and the campaign text.
pub fn pipeline(
    dir: &Path,
    input: &Path,
    h: usize,
    b: usize,
) -> (
    std::path::PathBuf,
    std::path::PathBuf,
    std::path::PathBuf,
    String,
) {
    let sorted = dir.join("sorted.DT");
    let ll = dir.join("LL.DT");
    let sl = dir.join("SL.DT");
    let (hs, bs) = (h.to_string(), b.to_string());
    ok(
        "dt-sort",
        &[
            s(input),
            hs.clone(),
            bs.clone(),
            s(&sorted),
            "--unique".into(),
        ],
        None,
    );
    ok(
        "dt-label",
        &[s(&sorted), hs.clone(), bs.clone(), s(&ll)],
        None,
    );
    ok(
        "dt-sort",
        &[s(&ll), "1".into(), bs.clone(), s(&sl), "--unique".into()],
        None,
    );
    let out = ok("dt-optimise", &[s(&sorted), s(&ll), s(&sl), hs, bs], None);
    (sorted, ll, sl, String::from_utf8(out.stdout).unwrap())
}
