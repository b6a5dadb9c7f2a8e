use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "fobw.h"

int main(void) {
    FobwSolution *h = NULL;
    if (fobw_solve_preset("example1-single", NULL, 1, 5, 1.0, &h) != FOBW_STATUS_OK) {
        fprintf(stderr, "%s\n", fobw_last_error());
        return 1;
    }
    double y, dy, d2y;
    if (fobw_solution_eval(h, 0.5, &y, &dy, &d2y) != FOBW_STATUS_OK) return 2;
    FobwReport rep;
    if (fobw_solution_report(h, &rep) != FOBW_STATUS_OK || !rep.converged) return 3;
    fobw_solution_free(h);
    if (fobw_solution_eval(NULL, 0.5, &y, &dy, &d2y) != FOBW_STATUS_ERR_NULL) return 4;
    printf("%.6f\n", y);
    return isfinite(y) ? 0 : 5;
}
"#;

fn have(tool: &str) -> bool {
    Command::new(tool).arg("--version").output().is_ok_and(|o| o.status.success())
}

// Compiles a C caller against the generated header and the static library.
#[test]
fn c_program_links_and_runs() {
    if !have("cc") {
        eprintln!("no C compiler; skipped");
        return;
    }
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libfobw_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipped", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let cc = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(cc.status.success(), "{}", String::from_utf8_lossy(&cc.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}: {}", run.status.code(), String::from_utf8_lossy(&run.stderr));
    let y: f64 = String::from_utf8_lossy(&run.stdout).trim().parse().unwrap();
    assert!(y.is_finite());
}
