use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("microset-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_microset")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

const THIRD: &str = r#"{"n":1,"b":3,"m":1,"cells":[[0]]}"#;

#[test]
fn verify_exit_codes() {
    let dir = scratch("verify");
    let set = dir.join("set.json");
    fs::write(&set, THIRD).unwrap();
    let good = dir.join("good.json");
    fs::write(&good, r#"{"n":1,"eps":"1/2","strong":false,"pieces":[[["0/1","1/3"]]]}"#).unwrap();
    let out = run(&["cover-verify", "--set", set.to_str().unwrap(), "--cover", good.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let greedy = dir.join("greedy.json");
    // volume 1 against a first budget of 1/2
    fs::write(&greedy, r#"{"n":1,"eps":"1/2","strong":false,"pieces":[[["0/1","1/1"]]]}"#).unwrap();
    let out = run(&["cover-verify", "--set", set.to_str().unwrap(), "--cover", greedy.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("position 1"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn malformed_input_names_the_file() {
    let dir = scratch("malformed");
    let bad = dir.join("bad.json");
    fs::write(&bad, "{\n  \"n\": 1,\n  oops\n}").unwrap();
    let out = run(&["cover-verify", "--set", bad.to_str().unwrap(), "--cover", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("bad.json") && msg.contains("line 3"), "{msg}");
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn refute_round_trip() {
    let dir = scratch("refute");
    let tree = dir.join("tree.json");
    let out = run(&["dust-generate", "--n", "1", "--b", "3", "--depth", "3", "-o", tree.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    // one tiny piece at the origin, well inside budget
    let cover = dir.join("cover.json");
    fs::write(&cover, r#"{"n":1,"eps":"1/100000","strong":true,"pieces":[[["0/1","1/1000000"]]]}"#).unwrap();
    let cert = dir.join("cert.json");
    let args = ["dust-refute", "--tree", tree.to_str().unwrap(), "--cover", cover.to_str().unwrap()];
    let out = run(&[&args[..], &["-o", cert.to_str().unwrap()]].concat());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&[&args[..], &["--certificate", cert.to_str().unwrap()]].concat());
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"valid\": true"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn precision_flag_parses() {
    assert_eq!(code(&run(&["--precision", "10^6", "dust-gaps", "--n", "1", "--b", "3", "--depth", "2"])), 0);
    assert_eq!(code(&run(&["--precision", "1/2", "dust-gaps", "--n", "1", "--b", "3", "--depth", "2"])), 2);
}
