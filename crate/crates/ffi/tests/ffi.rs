use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use anisolab::cli::RunConfig;
use anisolab::grid::{full_norm, GridField, NormKind, TensorGrid};
use anisolab::solver::picard_full;
use anisolab_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    unsafe { al_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn grid(n1: usize, n2: usize) -> *mut AlGrid {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { al_grid_new(0.0, 1.0, 0.0, 2.0, n1, n2, &mut g) }, AlStatus::Ok);
    g
}

fn problem(text: &str) -> Result<*mut AlProblem, AlStatus> {
    let c = CString::new(text).unwrap();
    let mut p = ptr::null_mut();
    match unsafe { al_problem_from_config(c.as_ptr(), &mut p) } {
        AlStatus::Ok => Ok(p),
        s => Err(s),
    }
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(al_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn grid_lifecycle_and_length() {
    let g = grid(5, 3);
    let mut len = 0;
    assert_eq!(unsafe { al_grid_len(g, &mut len) }, AlStatus::Ok);
    assert_eq!(len, 15);
    unsafe { al_grid_free(g) };
    unsafe { al_grid_free(ptr::null_mut()) };
}

#[test]
fn invalid_grid_sets_the_error_message() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { al_grid_new(0.0, 1.0, 0.0, 1.0, 0, 4, &mut g) }, AlStatus::Config);
    assert!(g.is_null());
    assert!(last_error().contains("interior node counts"), "{}", last_error());
    assert_eq!(unsafe { al_grid_new(0.0, 1.0, 0.0, 1.0, 2, 2, ptr::null_mut()) }, AlStatus::Null);
}

#[test]
fn last_error_reports_required_size_and_truncates() {
    let mut g = ptr::null_mut();
    unsafe { al_grid_new(1.0, 0.0, 0.0, 1.0, 2, 2, &mut g) };
    let need = unsafe { al_last_error(ptr::null_mut(), 0) };
    assert!(need > 10);
    let mut small = [1 as c_char; 4];
    assert_eq!(unsafe { al_last_error(small.as_mut_ptr(), small.len()) }, need);
    assert_eq!(small[3], 0);
}

#[test]
fn norms_match_the_library() {
    let g = grid(7, 5);
    let tg = TensorGrid::new(
        anisolab::grid::Interval::new(0.0, 1.0),
        anisolab::grid::Interval::new(0.0, 2.0),
        7,
        5,
    )
    .unwrap();
    let f = GridField::from_fn(&tg, |x1, x2| x1 * (1.0 - x1) * x2 * (2.0 - x2));
    let cases = [
        (AlNorm::L2, NormKind::L2),
        (AlNorm::Lr, NormKind::Lr(4.0)),
        (AlNorm::H1, NormKind::H1),
        (AlNorm::GradX1, NormKind::GradX1),
        (AlNorm::GradX2, NormKind::GradX2),
        (AlNorm::W, NormKind::Wnorm),
    ];
    for (k, nk) in cases {
        let mut out = 0.0;
        let s = unsafe { al_field_norm(g, f.values().as_ptr(), f.len(), k as i32, 4.0, &mut out) };
        assert_eq!(s, AlStatus::Ok);
        assert_eq!(out, full_norm(&f, nk));
    }
    let mut out = 0.0;
    assert_eq!(
        unsafe { al_field_norm(g, f.values().as_ptr(), f.len(), 42, 4.0, &mut out) },
        AlStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { al_field_norm(g, f.values().as_ptr(), f.len(), AlNorm::Lr as i32, 2.0, &mut out) },
        AlStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { al_field_norm(g, f.values().as_ptr(), 3, AlNorm::L2 as i32, 0.0, &mut out) },
        AlStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { al_field_norm(g, ptr::null(), 3, AlNorm::L2 as i32, 0.0, &mut out) },
        AlStatus::Null
    );
    unsafe { al_grid_free(g) };
}

#[test]
fn solve_matches_the_library_solver() {
    let text = "n1 = 12\nn2 = 10\nkernel = one\n";
    let p = problem(text).unwrap();
    let mut len = 0;
    assert_eq!(unsafe { al_problem_len(p, &mut len) }, AlStatus::Ok);
    assert_eq!(len, 120);
    let mut u = vec![0.0; len];
    let mut iterations = 0;
    assert_eq!(
        unsafe { al_problem_solve(p, 0.25, u.as_mut_ptr(), u.len(), &mut iterations) },
        AlStatus::Ok
    );
    let pr = RunConfig::parse(text).unwrap().problem().unwrap();
    let (expected, h) = picard_full(&pr.grid, &pr.blocks, &pr.spec, &pr.solver.with_epsilon(0.25)).unwrap();
    assert_eq!(u, expected.values());
    assert_eq!(iterations, h.iterations());

    let mut u0 = vec![0.0; len];
    assert_eq!(
        unsafe { al_problem_solve_limit(p, u0.as_mut_ptr(), u0.len(), ptr::null_mut()) },
        AlStatus::Ok
    );
    assert!(u0.iter().any(|&v| v != 0.0));

    let mut short = vec![0.0; len - 1];
    assert_eq!(
        unsafe { al_problem_solve(p, 0.25, short.as_mut_ptr(), short.len(), ptr::null_mut()) },
        AlStatus::BufferTooSmall
    );
    assert_eq!(
        unsafe { al_problem_solve(p, 0.0, u.as_mut_ptr(), u.len(), ptr::null_mut()) },
        AlStatus::InvalidArgument
    );
    unsafe { al_problem_free(p) };
}

#[test]
fn config_and_solver_failures_have_distinct_codes() {
    assert_eq!(problem("betta = 2\n").unwrap_err(), AlStatus::Config);
    assert!(last_error().contains("unknown key"));
    assert_eq!(problem("beta = 1/2\n").unwrap_err(), AlStatus::InvalidArgument);
    assert!(last_error().contains("must exceed"));

    let p = problem("n1 = 8\nn2 = 8\npicard_max = 1\n").unwrap();
    let mut u = vec![0.0; 64];
    assert_eq!(
        unsafe { al_problem_solve(p, 1.0, u.as_mut_ptr(), u.len(), ptr::null_mut()) },
        AlStatus::Solver
    );
    assert!(last_error().contains("Picard"));
    unsafe { al_problem_free(p) };

    let c = CString::new("n1 = 4").unwrap();
    assert_eq!(unsafe { al_problem_from_config(c.as_ptr(), ptr::null_mut()) }, AlStatus::Null);
    assert_eq!(unsafe { al_problem_solve(ptr::null(), 1.0, u.as_mut_ptr(), 64, ptr::null_mut()) }, AlStatus::Null);
}

#[test]
fn resolvent_contracts_in_l2() {
    let g = grid(9, 9);
    let tg = TensorGrid::new(
        anisolab::grid::Interval::new(0.0, 1.0),
        anisolab::grid::Interval::new(0.0, 2.0),
        9,
        9,
    )
    .unwrap();
    let f = GridField::from_fn(&tg, |x1, x2| (x1 * 7.0).sin() * x2);
    let mut out = vec![0.0; f.len()];
    assert_eq!(
        unsafe { al_resolvent_apply(g, 16, f.values().as_ptr(), f.len(), out.as_mut_ptr(), out.len()) },
        AlStatus::Ok
    );
    let u = GridField::from_values(&tg, out.clone()).unwrap();
    assert!(full_norm(&u, NormKind::L2) <= full_norm(&f, NormKind::L2));
    assert_eq!(
        unsafe { al_resolvent_apply(g, 0, f.values().as_ptr(), f.len(), out.as_mut_ptr(), out.len()) },
        AlStatus::InvalidArgument
    );
    unsafe { al_grid_free(g) };
}

#[test]
fn generated_header_declares_the_api_and_compiles() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include").join("anisolab.h");
    let text = std::fs::read_to_string(&header).expect("build script writes the header");
    for name in [
        "al_version",
        "al_last_error",
        "al_grid_new",
        "al_grid_free",
        "al_grid_len",
        "al_problem_from_config",
        "al_problem_free",
        "al_problem_len",
        "al_problem_solve",
        "al_problem_solve_limit",
        "al_field_norm",
        "al_resolvent_apply",
        "AL_STATUS_BUFFER_TOO_SMALL",
        "typedef struct AlGrid AlGrid",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
    // A C compiler is optional; when present the header must be valid C.
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"anisolab.h\"\nint main(void) { AlGrid *g = 0; AlStatus s = al_grid_new(0, 1, 0, 1, 2, 2, &g); al_grid_free(g); return (int)s; }\n",
    )
    .unwrap();
    match Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .output()
    {
        Ok(o) => assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr)),
        Err(e) => eprintln!("skipping C compile check: {e}"),
    }
}
