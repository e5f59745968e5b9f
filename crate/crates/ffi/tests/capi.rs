use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use fofh::*;

fn hamiltonian(spec: &str) -> *mut FofhHamiltonian {
    let spec = CString::new(spec).unwrap();
    let mut h = ptr::null_mut();
    let st = unsafe { fofh_hamiltonian_new(spec.as_ptr(), &mut h) };
    assert_eq!(st, FofhStatus::Ok);
    assert!(!h.is_null());
    h
}

fn last_error() -> String {
    let p = fofh_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn hamiltonian_roundtrip() {
    let h = hamiltonian("2*(1-exp(-x/2))");
    let (mut v, mut d) = (0.0, 0.0);
    unsafe {
        assert_eq!(fofh_hamiltonian_eval(h, 2.0, &mut v), FofhStatus::Ok);
        assert_eq!(fofh_hamiltonian_deriv(h, 1.0, &mut d), FofhStatus::Ok);
        fofh_hamiltonian_free(h);
    }
    assert!((v - 1.2642411176571154).abs() < 1e-15);
    assert!((d - 0.6065306597126334).abs() < 1e-15);
}

#[test]
fn errors_are_reported() {
    let spec = CString::new("exp(").unwrap();
    let mut h = ptr::null_mut();
    let st = unsafe { fofh_hamiltonian_new(spec.as_ptr(), &mut h) };
    assert_eq!(st, FofhStatus::Parse);
    assert!(h.is_null());
    assert!(last_error().contains("offset 4"), "{}", last_error());

    let st = unsafe { fofh_hamiltonian_new(ptr::null(), &mut h) };
    assert_eq!(st, FofhStatus::NullPointer);

    let ln = hamiltonian("ln(x-10)");
    let mut v = 0.0;
    assert_eq!(unsafe { fofh_hamiltonian_eval(ln, 1.0, &mut v) }, FofhStatus::Numeric);
    assert_eq!(
        unsafe { fofh_hamiltonian_eval(ln, 11.0, ptr::null_mut()) },
        FofhStatus::NullPointer
    );
    unsafe { fofh_hamiltonian_free(ln) };

    let mut s = ptr::null_mut();
    let st = unsafe { fofh_coherent_state(FofhComplex { re: 3.0, im: 0.0 }, 5, false, &mut s) };
    assert_eq!(st, FofhStatus::Truncation);
    let st = unsafe { fofh_coherent_state(FofhComplex { re: 3.0, im: 0.0 }, 5, true, &mut s) };
    assert_eq!(st, FofhStatus::Ok);
    let mut tail = 0.0;
    unsafe {
        assert_eq!(fofh_state_tail_bound(s, &mut tail), FofhStatus::Ok);
        let mut small = [FofhComplex::default(); 3];
        assert_eq!(
            fofh_state_amplitudes(s, small.as_mut_ptr(), small.len()),
            FofhStatus::BufferTooSmall
        );
        fofh_state_free(s);
    }
    assert!(tail > 0.5, "{tail}");
}

#[test]
fn state_evolution() {
    let kerr = hamiltonian("kerr:chi=1");
    let mut psi = ptr::null_mut();
    unsafe {
        assert_eq!(
            fofh_coherent_state(FofhComplex { re: 2.0, im: 0.0 }, 0, false, &mut psi),
            FofhStatus::Ok
        );
        let n = fofh_state_len(psi);
        assert_eq!(n, 45);
        let mut a = 0.0;
        assert_eq!(
            fofh_autocorrelation(psi, kerr, std::f64::consts::PI, &mut a),
            FofhStatus::Ok
        );
        assert!(a >= 1.0 - 1e-10);

        let mut out = ptr::null_mut();
        assert_eq!(fofh_state_evolve(psi, kerr, 0.7, &mut out), FofhStatus::Ok);
        let mut amps = vec![FofhComplex::default(); fofh_state_len(out)];
        assert_eq!(
            fofh_state_amplitudes(out, amps.as_mut_ptr(), amps.len()),
            FofhStatus::Ok
        );
        let norm: f64 = amps.iter().map(|z| z.re * z.re + z.im * z.im).sum();
        assert!((norm - 1.0).abs() < 1e-12);

        let mut obs = FofhObservables::default();
        assert_eq!(fofh_state_expectations(psi, &mut obs), FofhStatus::Ok);
        assert!((obs.mean_x - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((obs.var_x - 0.5).abs() < 1e-12);
        assert!((obs.mean_h0 - 4.5).abs() < 1e-12);

        fofh_state_free(out);
        fofh_state_free(psi);
        fofh_hamiltonian_free(kerr);
        assert_eq!(fofh_state_len(ptr::null()), 0);
    }
}

#[test]
fn classical_and_nogo() {
    let er = hamiltonian("er");
    let mut z = FofhComplex::default();
    let (mut ratio, mut res, mut defect) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(
            fofh_classical_evolve(er, FofhComplex { re: 2.0, im: 0.0 }, 1.0, &mut z),
            FofhStatus::Ok
        );
        assert_eq!(fofh_branch_ratio(er, 0, 1, 0.5, &mut ratio), FofhStatus::Ok);
        assert_eq!(fofh_er_residual(0, 1, 1, 0.0, &mut res), FofhStatus::Ok);
        let alpha = FofhComplex {
            re: 2f64.sqrt(),
            im: 0.0,
        };
        assert_eq!(
            fofh_coherence_defect(alpha, er, 20.0, FofhEnergyConvention::Classical, &mut defect),
            FofhStatus::Ok
        );
        fofh_hamiltonian_free(er);
    }
    // f'(2) = e^{-1}
    let w = (-1.0f64).exp();
    assert!((z.re - 2.0 * w.cos()).abs() < 1e-14 && (z.im + 2.0 * w.sin()).abs() < 1e-14);
    assert!((ratio + 0.6523950804189188).abs() < 1e-13);
    assert!((res - 2.432419199922001).abs() < 1e-12);
    assert!((defect - 0.5194738554065833).abs() < 1e-10);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(fofh_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn c_program_links_against_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/capi-* -> target/<profile>
    let profile_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = profile_dir.join("libfofh.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let fields: Vec<&str> = text.split_whitespace().collect();
    assert_eq!(fields[0], env!("CARGO_PKG_VERSION"));
    assert!((fields[1].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    assert!((fields[2].parse::<f64>().unwrap() - 0.5194738554065833).abs() < 1e-10);
}
