use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "hexloop.h"

int main(void) {
    double p[3];
    if (hxl_edge_probabilities(1.0, 1.0, 1.0, p) != HXL_STATUS_OK) return 1;
    if (p[0] < 0.3333 || p[0] > 0.3334) return 2;
    if (hxl_edge_probabilities(1.0, 1.0, 3.0, p) != HXL_STATUS_PRECONDITION) return 3;
    if (strlen(hxl_last_error()) == 0) return 4;
    uint64_t n = 0;
    if (hxl_enumerate_count(2, false, &n) != HXL_STATUS_OK || n == 0) return 5;
    HxlConfig *cfg = NULL;
    if (hxl_config_new(6, 0, 0, &cfg) != HXL_STATUS_OK) return 6;
    size_t counts[3];
    hxl_config_type_counts(cfg, counts);
    hxl_config_free(cfg);
    printf("%llu %zu\n", (unsigned long long)n, counts[0] + counts[1] + counts[2]);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_static_library() {
    let lib = target_dir().join("libhexloop_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let src = dir.join("hexloop_smoke.c");
    let bin = dir.join("hexloop_smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap_or_else(|e| panic!("cannot run {cc}: {e}"));
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut parts = text.split_whitespace();
    let n: u64 = parts.next().unwrap().parse().unwrap();
    assert!(n > 0);
    assert_eq!(parts.next(), Some("36"));
}
