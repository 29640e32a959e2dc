use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

use prolong_core::report::{Status, parse_result_line};

fn prolong(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prolong"))
        .args(args)
        .output()
        .expect("run prolong")
}

fn problem(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("problems")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn results(text: &str) -> Vec<(String, Status, String)> {
    text.lines()
        .filter(|l| l.starts_with("RESULT "))
        .map(|l| parse_result_line(l).unwrap())
        .collect()
}

fn temp_problem(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".prob").tempfile().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn broken_covering_exits_one_with_residual() {
    let o = prolong(&["verify-covering", &problem("broken.prob")]);
    assert_eq!(o.status.code(), Some(1));
    let rs = results(&stdout(&o));
    let (_, status, residual) = rs.iter().find(|(id, ..)| id == "broken.flat.ty.v[0]").unwrap();
    assert_eq!(*status, Status::Fail);
    assert_eq!(residual, "u_x^2*u_xx*v[1]-2*u_x*u_xy*v[1]+2*u_tx*v[1]");
    assert!(rs.iter().any(|(id, s, _)| id == "broken.closure.v[0]" && *s == Status::Fail));
}

#[test]
fn catalog_names_resolve_without_a_path() {
    let o = prolong(&["verify-covering", "khz.prob"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("15 checks: 15 passed, 0 failed, 0 inconclusive\n"));
}

#[test]
fn check_coframe_prints_four_congruences() {
    let o = prolong(&["check-coframe", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let rs = results(&stdout(&o));
    let congruences: Vec<_> = rs
        .iter()
        .filter(|(id, ..)| ["i", "ii", "iii", "iv"].iter().any(|n| *id == format!("coframe.n2.{n}")))
        .collect();
    assert_eq!(congruences.len(), 4);
    assert!(congruences.iter().all(|(_, s, r)| *s == Status::Pass && r == "0"));
}

#[test]
fn parse_errors_exit_two_with_position() {
    let f = temp_problem("independent t x y\ndependent u\nequation u_yy = u_tx + w\n");
    let o = prolong(&["verify-covering", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains(":3:24: undeclared identifier w"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(prolong(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(prolong(&["we-forms", "khz.prob"]).status.code(), Some(2));
    assert_eq!(prolong(&["check-coframe", "--n", "0"]).status.code(), Some(2));
    assert_eq!(prolong(&["verify-covering", "/no/such/file.prob"]).status.code(), Some(2));
}

#[test]
fn empty_report_exits_two() {
    let f = temp_problem("independent x\ndependent u\n");
    let o = prolong(&["verify-backlund", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o), "0 checks\n");
}

#[test]
fn family_checks_note_their_order() {
    let text = "independent t x\ndependent u\nfiber v family x\norder 1\n\
                equation u_t = u_xx\ncover t: v[3]\n";
    let f = temp_problem(text);
    let o = prolong(&["verify-covering", f.path().to_str().unwrap()]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}");
    assert!(out.contains("NOTE problem.flat.tx.v[1] checked through order 1\n"), "{out}");
}

#[test]
fn reduce_prints_normal_form() {
    let o = prolong(&["reduce", "mkhz.prob", "--expr", "u_yx*u_yy - u_xy*u_tx"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1/2*u_x^2*u_xx*u_xy-u_xx*u_xy*u_y\n");
    let o = prolong(&["reduce", "mkhz.prob", "--expr", "-u_yy"]);
    assert_eq!(stdout(&o), "-1/2*u_x^2*u_xx+u_xx*u_y-u_tx\n");
}

#[test]
fn we_forms_are_printed() {
    let o = prolong(&["we-forms", "mkhz.prob", "--max", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("FORM fiber=v[0] form=-(1/2*u_x^2*v[1]+u_y*v[1])*dt+dv[0]-v[1]*dx-u_x*v[1]*dy\n"), "{out}");
    assert!(out.contains("FORM fiber=v[1] "));
}

#[test]
fn shuffled_declarations_give_identical_reports() {
    let original = prolong(&["verify-covering", &problem("khz.prob")]);
    let shuffled = temp_problem(
        "# same covering, terms and lines reordered\n\
         order 3\nname khz\nindependent t x y\ndependent u\nfiber v family x\n\
         equation u_yy = u_x^2 + u_xx*u + u_xt\n\
         cover y: -u_x + v[1]*v[0]\n\
         cover x: v[1]\n\
         cover t: -v[0]*u_x + v[1]*(v[0]^2 - u) - u_y\n",
    );
    let other = prolong(&["verify-covering", shuffled.path().to_str().unwrap()]);
    assert_eq!(original.status.code(), Some(0));
    assert_eq!(stdout(&original), stdout(&other));

    let backlund = prolong(&["verify-backlund", &problem("khz-potential.prob")]);
    let reordered = temp_problem(
        "name khz-potential\nindependent t x y\ndependent w v u\n\
         backlund potential\n  eliminate w\n\
         relation w_y = -u + v^2/2\n  relation w_x = v\n\
         source v_y = -u_x + v_x*v\n  source v_t = -v*u_x - u_y + (v^2 - u)*v_x\n\
         source u_yy = u_x^2 + u*u_xx + u_tx\n\
         target w_yy = w_tx + (1/2*w_x^2 - w_y)*w_xx\nend\n",
    );
    let other = prolong(&["verify-backlund", reordered.path().to_str().unwrap()]);
    assert_eq!(stdout(&backlund), stdout(&other));
}
