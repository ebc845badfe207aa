use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use stencil_lab_ffi::*;

fn last_error() -> String {
    let p = sl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn generate(domain: &str, h: f64) -> *mut SlNodeSet {
    let d = CString::new(domain).unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { sl_nodes_generate(d.as_ptr(), h, 3, SlGenerator::AdvancingFront as u32, &mut out) };
    assert_eq!(st, SlStatus::Ok);
    assert!(!out.is_null());
    out
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(sl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn nodes_roundtrip() {
    let ns = generate("disc", 0.1);
    unsafe {
        let n = sl_nodes_len(ns);
        assert_eq!(sl_nodes_dim(ns), 2);
        assert!(n > 50);
        let mut pos = vec![0.0; 2 * n];
        assert_eq!(sl_nodes_positions(ns, pos.as_mut_ptr(), pos.len()), SlStatus::Ok);
        for p in pos.chunks(2) {
            assert!(((p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2)).sqrt() <= 0.5 + 1e-12);
        }
        let mut mask = vec![0u8; n];
        assert_eq!(sl_nodes_boundary_mask(ns, mask.as_mut_ptr(), n), SlStatus::Ok);
        assert!(mask.iter().any(|&b| b == 1) && mask.iter().any(|&b| b == 0));

        let mut short = vec![0.0; n];
        assert_eq!(sl_nodes_positions(ns, short.as_mut_ptr(), short.len()), SlStatus::InvalidArgument);
        assert!(last_error().contains("needed"));

        let mut q = SlQuality::default();
        assert_eq!(sl_nodes_quality(ns, 50, &mut q), SlStatus::Ok);
        assert!(q.delta >= 0.09 && q.gamma > 0.0);
        sl_nodes_free(ns);
    }
}

#[test]
fn shape_json_and_errors() {
    let ns = generate(r#"{"shape":"disc","center":[0.0,0.0],"radius":1.0}"#, 0.2);
    unsafe { sl_nodes_free(ns) };

    let bad = CString::new("dodecahedron").unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { sl_nodes_generate(bad.as_ptr(), 0.1, 0, 0, &mut out) };
    assert_eq!(st, SlStatus::Config);
    assert!(last_error().contains("dodecahedron"));
    assert!(out.is_null());

    let disc = CString::new("disc").unwrap();
    assert_eq!(unsafe { sl_nodes_generate(disc.as_ptr(), 0.1, 0, 9, &mut out) }, SlStatus::InvalidArgument);
    assert_eq!(unsafe { sl_nodes_generate(ptr::null(), 0.1, 0, 0, &mut out) }, SlStatus::NullPointer);
    assert_eq!(unsafe { sl_nodes_generate(disc.as_ptr(), -1.0, 0, 0, &mut out) }, SlStatus::Config);
    unsafe {
        assert_eq!(sl_nodes_len(ptr::null()), 0);
        sl_nodes_free(ptr::null_mut());
        sl_weights_free(ptr::null_mut());
        sl_run_free(ptr::null_mut());
    }
}

#[test]
fn laplacian_weights_reproduce_quadratics() {
    let ns = generate("disc", 0.1);
    let op = CString::new("laplacian").unwrap();
    let kernel = CString::new("phs3").unwrap();
    unsafe {
        let mut w = ptr::null_mut();
        assert_eq!(sl_weights_compute(ns, op.as_ptr(), kernel.as_ptr(), 2, 12, &mut w), SlStatus::Ok);
        let rows = sl_weights_rows(w);
        let nnz = sl_weights_nnz(w);
        assert_eq!(rows, sl_nodes_len(ns));
        assert_eq!(nnz, 12 * rows);
        let mut rp = vec![0usize; rows + 1];
        let mut cols = vec![0usize; nnz];
        let mut vals = vec![0.0; nnz];
        assert_eq!(sl_weights_csr(w, rp.as_mut_ptr(), rp.len(), cols.as_mut_ptr(), vals.as_mut_ptr(), nnz), SlStatus::Ok);
        let mut pos = vec![0.0; 2 * rows];
        sl_nodes_positions(ns, pos.as_mut_ptr(), pos.len());
        // laplacian of x^2 + 3xy - y^2 is 0, of x^2 + y^2 is 4
        let f = |i: usize| pos[2 * i] * pos[2 * i] + pos[2 * i + 1] * pos[2 * i + 1];
        for r in 0..rows {
            let s: f64 = (rp[r]..rp[r + 1]).map(|k| vals[k] * f(cols[k])).sum();
            assert!((s - 4.0).abs() < 1e-8, "row {r}: {s}");
        }

        let mut w2 = ptr::null_mut();
        assert_eq!(sl_weights_compute(ns, op.as_ptr(), kernel.as_ptr(), 3, 5, &mut w2), SlStatus::InvalidArgument);
        assert!(last_error().contains("monomials"));
        let tiny = CString::new("phs4").unwrap();
        assert_eq!(sl_weights_compute(ns, op.as_ptr(), tiny.as_ptr(), 2, 12, &mut w2), SlStatus::Config);
        sl_weights_free(w);
        sl_nodes_free(ns);
    }
}

#[test]
fn sweep_in_memory() {
    let cfg = CString::new("domain = \"disc\"\nh = 0.08\n[sweep]\nn_min = 10\nn_max = 12\n").unwrap();
    unsafe {
        let mut run = ptr::null_mut();
        assert_eq!(sl_sweep_run(cfg.as_ptr(), &mut run), SlStatus::Ok);
        let n = sl_run_len(run);
        assert_eq!(n, 3);
        let mut recs = vec![SlSweepRecord::default(); n];
        assert_eq!(sl_run_records(run, recs.as_mut_ptr(), n), SlStatus::Ok);
        assert_eq!(recs.iter().map(|r| r.n).collect::<Vec<_>>(), vec![10, 11, 12]);
        assert!(recs.iter().all(|r| r.ok == 1 && r.e_max_poiss > 0.0 && r.imex_avg.is_nan()));
        sl_run_free(run);

        let bad = CString::new("domain = \"disc\"\nh = 0.08\n[sweep]\nn_min = 12\nn_max = 10\n").unwrap();
        assert_eq!(sl_sweep_run(bad.as_ptr(), &mut run), SlStatus::Config);
        assert!(last_error().contains("validate"));
    }
}

#[test]
fn config_file_run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    let text = format!(
        "name = \"ffi\"\ndomain = \"disc\"\nh = 0.1\noutput = {:?}\n[sweep]\nn_min = 10\nn_max = 11\n",
        dir.path().to_str().unwrap()
    );
    std::fs::write(&path, text).unwrap();
    let p = CString::new(path.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { sl_run_config_file(p.as_ptr(), false) }, SlStatus::Ok);
    assert!(dir.path().join("ffi.csv").exists());
    assert!(dir.path().join("ffi.manifest.json").exists());
}

#[test]
fn header_is_current_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/stencil_lab.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in [
        "sl_last_error",
        "sl_nodes_generate",
        "sl_nodes_positions",
        "sl_weights_csr",
        "sl_sweep_run",
        "sl_run_config_file",
        "SL_STATUS_OK",
        "SL_GENERATOR_HALTON",
        "typedef struct SlNodeSet SlNodeSet",
    ] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"stencil_lab.h\"\nint main(void) { SlNodeSet *n = 0; return sl_nodes_len(n) == 0 ? SL_STATUS_OK : 1; }\n",
    )
    .unwrap();
    match Command::new("cc").arg("-fsyntax-only").arg("-I").arg(header.parent().unwrap()).arg(&src).status() {
        Ok(s) => assert!(s.success(), "header does not compile"),
        Err(_) => eprintln!("no C compiler found; skipped compile check"),
    }
}
