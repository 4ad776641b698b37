use std::ffi::CStr;
use std::ptr;

use hexloop_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(hxl_last_error()).to_string_lossy().into_owned() }
}

#[test]
fn edge_probabilities_sum_to_one() {
    let mut p = [0.0; 3];
    assert_eq!(unsafe { hxl_edge_probabilities(3.0, 4.0, 5.0, p.as_mut_ptr()) }, HxlStatus::Ok);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!((p[2] - 0.5).abs() < 1e-12);
    assert_eq!(last_error(), "");
}

#[test]
fn frozen_and_invalid_weights() {
    let mut p = [0.0; 3];
    assert_eq!(unsafe { hxl_edge_probabilities(1.0, 1.0, 3.0, p.as_mut_ptr()) }, HxlStatus::Precondition);
    assert!(last_error().contains("frozen"));
    assert_eq!(unsafe { hxl_edge_probabilities(-1.0, 1.0, 1.0, p.as_mut_ptr()) }, HxlStatus::Invalid);
    assert_eq!(unsafe { hxl_edge_probabilities(1.0, 1.0, 1.0, ptr::null_mut()) }, HxlStatus::NullPointer);
}

#[test]
fn kinv_and_hexagon() {
    let (mut v, mut err) = (0.0, 0.0);
    assert_eq!(unsafe { hxl_kinv_entry(1.0, 1.0, 1.0, 0, 0, 1e-12, &mut v, &mut err) }, HxlStatus::Ok);
    assert!((v - 1.0 / 3.0).abs() < 1e-10);
    assert_eq!(unsafe { hxl_kinv_entry(1.0, 1.0, 1.0, 0, 0, 1e-12, &mut v, ptr::null_mut()) }, HxlStatus::Ok);
    let mut h = 0.0;
    assert_eq!(unsafe { hxl_hexagon_triple_probability(1.0, 1.0, 1.0, &mut h) }, HxlStatus::Ok);
    assert!(h > 0.0 && h < 1.0);
}

#[test]
fn enumeration_counts() {
    let mut n = 0u64;
    assert_eq!(unsafe { hxl_enumerate_count(1, false, &mut n) }, HxlStatus::Ok);
    assert_eq!(n, 3);
    assert_eq!(unsafe { hxl_enumerate_count(9, false, &mut n) }, HxlStatus::Invalid);
    assert!(!last_error().is_empty());
}

#[test]
fn config_roundtrip_and_chain() {
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(hxl_config_new(6, 0, 0, &mut cfg), HxlStatus::Ok);
        let mut counts = [0usize; 3];
        assert_eq!(hxl_config_type_counts(cfg, counts.as_mut_ptr()), HxlStatus::Ok);
        assert_eq!(counts.iter().sum::<usize>(), 36);

        let mut need = 0;
        assert_eq!(hxl_config_to_bytes(cfg, ptr::null_mut(), 0, &mut need), HxlStatus::Ok);
        let mut buf = vec![0u8; need];
        assert_eq!(hxl_config_to_bytes(cfg, buf.as_mut_ptr(), 1, &mut need), HxlStatus::Invalid);
        assert_eq!(hxl_config_to_bytes(cfg, buf.as_mut_ptr(), buf.len(), &mut need), HxlStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(hxl_config_from_bytes(buf.as_ptr(), buf.len(), &mut back), HxlStatus::Ok);
        let (mut i, mut j) = (9, 9);
        assert_eq!(hxl_config_height_change(back, &mut i, &mut j), HxlStatus::Ok);
        assert_eq!((i, j), (0, 0));

        let mut chain = ptr::null_mut();
        assert_eq!(hxl_chain_new(cfg, 1.0, 1.0, 1.0, 7, &mut chain), HxlStatus::Ok);
        let mut acc = 0;
        assert_eq!(hxl_chain_sweep(chain, 5, &mut acc), HxlStatus::Ok);
        assert!(acc > 0);
        let mut cur = ptr::null_mut();
        assert_eq!(hxl_chain_config(chain, &mut cur), HxlStatus::Ok);
        assert_eq!(hxl_config_height_change(cur, &mut i, &mut j), HxlStatus::Ok);
        assert_eq!((i, j), (0, 0));

        let mut svg = ptr::null_mut();
        assert_eq!(hxl_config_render_svg(cur, true, true, &mut svg), HxlStatus::Ok);
        assert!(CStr::from_ptr(svg).to_str().unwrap().contains("<svg"));
        hxl_string_free(svg);

        hxl_chain_free(chain);
        hxl_config_free(cur);
        hxl_config_free(back);
        hxl_config_free(cfg);
        hxl_config_free(ptr::null_mut());
    }
}

#[test]
fn flip_twice_restores() {
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(hxl_config_new(3, 0, 0, &mut cfg), HxlStatus::Ok);
        let mut copy = ptr::null_mut();
        assert_eq!(hxl_config_clone(cfg, &mut copy), HxlStatus::Ok);
        let mut any = false;
        for n in 0..3 {
            for m in 0..3 {
                let mut f = false;
                assert_eq!(hxl_config_flip(cfg, n, m, &mut f), HxlStatus::Ok);
                if f {
                    any = true;
                    assert_eq!(hxl_config_flip(cfg, n, m, &mut f), HxlStatus::Ok);
                    assert!(f);
                }
            }
        }
        assert!(any);
        let (mut a, mut b) = (0, 0);
        let mut ba = vec![0u8; 64];
        let mut bb = vec![0u8; 64];
        hxl_config_to_bytes(cfg, ba.as_mut_ptr(), 64, &mut a);
        hxl_config_to_bytes(copy, bb.as_mut_ptr(), 64, &mut b);
        assert_eq!(ba[..a], bb[..b]);
        assert_eq!(hxl_config_new(3, 100, 0, &mut copy), HxlStatus::Invalid);
        hxl_config_free(cfg);
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/hexloop.h");
    let src = include_str!("../src/lib.rs");
    let mut n = 0;
    for line in src.lines() {
        if let Some(rest) = line.split("extern \"C\" fn ").nth(1) {
            let name = rest.split('(').next().unwrap();
            assert!(header.contains(&format!("{name}(")), "{name} missing from header");
            n += 1;
        }
    }
    assert!(n >= 15);
    assert!(header.contains("typedef struct HxlConfig HxlConfig;"));
}
