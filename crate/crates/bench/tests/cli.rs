//! End-to-end CLI checks: exit codes and emitted files.

use std::path::PathBuf;
use std::process::Command;

fn bench_binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_glc-bench"))
}

fn temp_dir(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("glc_cli_{tag}_{}", std::process::id()))
}

fn write_config(tag: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("glc_cli_{tag}_{}.conf", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn converging_scenario_exits_zero_and_writes_reports() {
    let out = temp_dir("ok");
    let config = write_config(
        "ok",
        "[scenario]\nid = cli_ok\nmode = sync\n[grid]\nnx = 1\nny = 1\nnz = 2\ncoarse_elems = 2\nfine_elems = 4\n",
    );
    let status = bench_binary()
        .args(["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("results.csv").exists());
    assert!(out.join("summary.json").exists());
    let results = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(results.starts_with(
        "scenario,mode,omega,it_global,it_fine_min,it_fine_max,wall_ms,rel_residual,rel_error,converged"
    ));
    let _ = std::fs::remove_dir_all(&out);
    let _ = std::fs::remove_file(&config);
}

#[test]
fn non_converging_scenario_exits_two() {
    let out = temp_dir("maxed");
    let config = write_config(
        "maxed",
        "[scenario]\nid = cli_maxed\nmode = sync\nmax_iters = 2\ntol = 1e-14\n\
         [grid]\nnx = 1\nny = 1\nnz = 2\ncoarse_elems = 2\nfine_elems = 4\n",
    );
    let status = bench_binary()
        .args(["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&out);
    let _ = std::fs::remove_file(&config);
}

#[test]
fn bad_config_exits_one() {
    let config = write_config("bad", "[material]\nnu = 0.7\n");
    let output = bench_binary()
        .args(["--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("nu"));
    let _ = std::fs::remove_file(&config);
}

#[test]
fn unknown_flag_exits_one() {
    let output = bench_binary().args(["--frobnicate"]).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn mesh_dump_flag_writes_plaintext_meshes() {
    let out = temp_dir("dump");
    let config = write_config(
        "dump",
        "[scenario]\nid = cli_dump\nmode = sync\n[grid]\nnx = 1\nny = 1\nnz = 1\ncoarse_elems = 1\nfine_elems = 2\n",
    );
    let status = bench_binary()
        .args([
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--dump-meshes",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let coarse = std::fs::read_to_string(out.join("cube_0_0_0_coarse.mesh.txt")).unwrap();
    assert!(coarse.lines().any(|l| l.starts_with("node 0 ")));
    assert!(coarse.lines().any(|l| l.starts_with("hex 0 ")));
    assert!(out.join("cube_0_0_0_fine.mesh.txt").exists());
    let _ = std::fs::remove_dir_all(&out);
    let _ = std::fs::remove_file(&config);
}

#[test]
fn omega_override_replaces_sweep() {
    let out = temp_dir("override");
    let config = write_config(
        "override",
        "[scenario]\nid = cli_override\nmode = sync\n[grid]\nnx = 1\nny = 1\nnz = 2\ncoarse_elems = 2\nfine_elems = 4\n\
         [relaxation]\nomega_sweep = 0.4, 0.8\n",
    );
    let status = bench_binary()
        .args([
            "--config",
            config.to_str().unwrap(),
            "--omega",
            "1.0",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let results = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 2, "one run only:\n{results}");
    assert!(results.lines().nth(1).unwrap().contains(",1,"));
    let _ = std::fs::remove_dir_all(&out);
    let _ = std::fs::remove_file(&config);
}
