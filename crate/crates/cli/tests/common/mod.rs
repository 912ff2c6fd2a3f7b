#![allow(dead_code)] // each test target uses a different subset

use std::path::Path;
use std::process::{Command, Output};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

pub fn lanegraph(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lanegraph"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn lanegraph binary")
}

pub fn expect_success(dir: &Path, args: &[&str]) -> Output {
    let out = lanegraph(dir, args);
    assert_eq!(
        out.status.code(),
        Some(EXIT_OK),
        "command {:?} failed\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr),
    );
    out
}

pub fn stdout_lines(out: &Output) -> Vec<String> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(str::to_string)
        .collect()
}
