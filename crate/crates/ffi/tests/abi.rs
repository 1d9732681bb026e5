use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use chronoscope::causal::ci_exact;
use chronoscope::hamlib::build_ising;
use chronoscope::qcore::StateVector;
use chronoscope_ffi::*;

fn last_error() -> String {
    let p = chrono_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn values_match_the_library() {
    unsafe {
        let label = CString::new("0r1").unwrap();
        let mut s = ptr::null_mut();
        let mut h = ptr::null_mut();
        assert_eq!(chrono_state_from_label(label.as_ptr(), &mut s), ChronoStatus::Ok);
        assert_eq!(chrono_hamiltonian_ising(3, 1.0, 0.3, 0.2, &mut h), ChronoStatus::Ok);
        assert_eq!(chrono_state_n_qubits(s), 3);

        let mut v = f64::NAN;
        assert_eq!(chrono_ci_exact(s, h, 0, 1, 0.5, 1e-12, &mut v), ChronoStatus::Ok);
        let want = ci_exact(&StateVector::from_label("0r1").unwrap(), &build_ising(3, 1.0, 0.3, 0.2).unwrap(), 0, 1, 0.5)
            .unwrap()
            .value;
        assert!((v - want).abs() < 1e-14);

        let (mut mc, mut se) = (0.0, 0.0);
        assert_eq!(chrono_ci_monte_carlo(s, h, 0, 1, 0.5, 4000, 11, &mut mc, &mut se), ChronoStatus::Ok);
        assert!((mc - v).abs() < 5.0 * se + 1e-12);

        let mut e = ptr::null_mut();
        assert_eq!(chrono_evolve(s, h, 0.3, 1e-12, &mut e), ChronoStatus::Ok);
        let (mut re, mut im) = (vec![0.0; 8], vec![0.0; 8]);
        assert_eq!(chrono_state_amplitudes(e, re.as_mut_ptr(), im.as_mut_ptr(), 8), ChronoStatus::Ok);
        let norm: f64 = re.iter().zip(&im).map(|(a, b)| a * a + b * b).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        let mut copy = ptr::null_mut();
        assert_eq!(chrono_state_from_amplitudes(3, re.as_ptr(), im.as_ptr(), 8, &mut copy), ChronoStatus::Ok);

        let mut f = ptr::null_mut();
        assert_eq!(chrono_aot_field(s, h, 0.05, 2, 1e-12, &mut f), ChronoStatus::Ok);
        let (mut nt, mut nx) = (0, 0);
        assert_eq!(chrono_field_shape(f, &mut nt, &mut nx), ChronoStatus::Ok);
        assert_eq!((nt, nx), (3, 3));
        let (mut vt, mut vx, mut ent) = (0.0, 0.0, 0.0);
        assert_eq!(chrono_field_get(f, 2, 2, &mut vt, &mut vx, &mut ent), ChronoStatus::Ok);
        assert!(vt.is_finite() && vx.is_finite() && ent >= 0.0);
        assert_eq!(chrono_field_get(f, 3, 0, &mut vt, &mut vx, &mut ent), ChronoStatus::InvalidArgument);

        chrono_field_free(f);
        chrono_state_free(copy);
        chrono_state_free(e);
        chrono_state_free(s);
        chrono_hamiltonian_free(h);
    }
}

#[test]
fn failures_set_status_and_message() {
    unsafe {
        chrono_clear_error();
        assert!(chrono_last_error().is_null());
        let mut s = ptr::null_mut();
        let bad = CString::new("01x").unwrap();
        assert_eq!(chrono_state_from_label(bad.as_ptr(), &mut s), ChronoStatus::InvalidArgument);
        assert!(s.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(chrono_state_from_label(ptr::null(), &mut s), ChronoStatus::NullPointer);
        assert!(last_error().contains("label"));

        let mut h = ptr::null_mut();
        assert_eq!(chrono_hamiltonian_ising(2, 1.0, 0.0, 0.0, &mut h), ChronoStatus::Ok);
        assert_eq!(chrono_state_random(3, 1, &mut s), ChronoStatus::Ok);
        let mut v = 0.0;
        assert_eq!(chrono_ci_exact(s, h, 0, 1, 0.1, 1e-12, &mut v), ChronoStatus::DimensionMismatch);
        assert_eq!(chrono_ci_exact(s, ptr::null(), 0, 1, 0.1, 1e-12, &mut v), ChronoStatus::NullPointer);

        let coeffs = [1.0, 0.5];
        let words: Vec<CString> = ["XXZ", "IZ"].iter().map(|w| CString::new(*w).unwrap()).collect();
        let ptrs: Vec<_> = words.iter().map(|w| w.as_ptr()).collect();
        let mut g = ptr::null_mut();
        let st = chrono_hamiltonian_from_terms(3, coeffs.as_ptr(), ptrs.as_ptr(), 2, &mut g);
        assert_ne!(st, ChronoStatus::Ok);
        assert!(g.is_null());

        chrono_state_free(s);
        chrono_hamiltonian_free(h);
        chrono_state_free(ptr::null_mut());
    }
}

fn find_static_lib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let deps = exe.parent()?;
    [deps, deps.parent()?].iter().map(|d| d.join("libchronoscope_ffi.a")).find(|p| p.exists())
}

#[test]
fn c_program_links_against_header() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(root.join("include/chronoscope.h")).unwrap();
    for sym in ["chrono_ci_exact", "chrono_aot_field", "chrono_last_error", "CHRONO_STATUS_PANIC"] {
        assert!(header.contains(sym), "{sym} missing from header");
    }
    let Some(lib) = find_static_lib() else {
        eprintln!("static library not found next to the test binary; skipping C link");
        return;
    };
    let bin = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("chronoscope_smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg(root.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(root.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status();
    match status {
        Ok(s) => assert!(s.success(), "C compile failed"),
        Err(e) => {
            eprintln!("no C compiler ({e}); skipping C link");
            return;
        }
    }
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "smoke exited {:?}: {}", out.status, String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with(env!("CARGO_PKG_VERSION")));
}
