use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;
use stablekit::density::pdf_univariate;
use stablekit::simulate::{rstable, RngStream};
use stablekit::{datasets, em, gof, Form, StableParams};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stablekit"))
        .args(args)
        .env_remove("STABLEKIT_SEED")
        .env_remove("STABLEKIT_TOL")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn csv_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn pdf_matches_library_exactly() {
    let v = json(&["--json", "pdf", "--y", "2", "--alpha", "1.2", "--beta", "0.9", "--sigma", "1", "--mu", "0", "--param", "1"]);
    let p = StableParams::new(1.2, 0.9, 1.0, 0.0, Form::S1).unwrap();
    assert_eq!(v["pdf"].as_f64().unwrap(), pdf_univariate(2.0, &p).unwrap());
    let human = json(&["pdf", "--y", "2", "--alpha", "1.2", "--beta", "0.9", "--sigma", "1", "--mu", "0", "--param", "1"]);
    assert!((human["pdf"].as_f64().unwrap() - 0.0240643).abs() < 2e-7);
}

#[test]
fn simulation_is_reproducible_and_matches_library() {
    let args = ["--json", "sim", "--n", "5", "--alpha", "1.3", "--beta", "0.5", "--sigma", "2", "--mu", "0", "--param", "0", "--seed", "7"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let p = StableParams::new(1.3, 0.5, 2.0, 0.0, Form::S0).unwrap();
    assert_eq!(floats(&v["values"]), rstable(5, &p, &RngStream::new(7, 0)).unwrap());
}

#[test]
fn seed_from_environment() {
    let base = ["sim", "--n", "3", "--alpha", "1.5", "--beta", "0", "--sigma", "1", "--mu", "0"];
    let with_flag = run(&[&base[..], &["--seed", "42"]].concat());
    let with_env = Command::new(env!("CARGO_BIN_EXE_stablekit"))
        .args(base)
        .env("STABLEKIT_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(with_flag.stdout, with_env.stdout);
}

#[test]
fn exit_codes() {
    let missing = run(&["pdf", "--y", "2"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("--alpha"));
    let bad_list = run(&["fit", "sym-mix", "--dataset", "galaxy", "--k", "2", "--init-omega", "0.5,x", "--init-alpha", "1,1", "--init-sigma", "1,1", "--init-mu", "1,2"]);
    assert_eq!(bad_list.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad_list.stderr).contains("--init-omega"));
    let domain = run(&["pdf", "--y", "2", "--alpha", "3", "--beta", "0", "--sigma", "1", "--mu", "0"]);
    assert_eq!(domain.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&domain.stderr).contains("DomainError"));
    let unknown = run(&["fit", "tail", "--dataset", "nope"]);
    assert_eq!(unknown.status.code(), Some(1));
}

#[test]
fn csv_input_and_parse_errors() {
    let good = csv_file("y\n1.5\n-0.3\n2.0\n0.1\n0.7\n-1.1\n0.4\n0.9\n-2.5\n3.1\n0.0\n");
    let v = json(&["--json", "gof", "--file", good.path().to_str().unwrap(), "--alpha", "1.5", "--beta", "0", "--sigma", "1", "--mu", "0"]);
    let data = [1.5, -0.3, 2.0, 0.1, 0.7, -1.1, 0.4, 0.9, -2.5, 3.1, 0.0];
    let g = gof::gof(&data, &StableParams::symmetric(1.5, 1.0, 0.0).unwrap()).unwrap();
    assert_eq!(v["ks"].as_f64().unwrap(), g.ks);
    assert_eq!(v["ad"].as_f64().unwrap(), g.ad);
    assert_eq!(v["n"].as_u64().unwrap(), 11);

    let bad = csv_file("1\n2\nabc\n4\n");
    let out = run(&["gof", "--file", bad.path().to_str().unwrap(), "--alpha", "1.5", "--beta", "0", "--sigma", "1", "--mu", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("ParseError") && err.contains("row 3"), "{err}");
}

#[test]
fn mixture_fit_matches_library() {
    let v = json(&[
        "--json", "fit", "sym-mix", "--dataset", "galaxy", "--k", "3", "--init-omega", "0.1,0.35,0.55", "--init-alpha", "1.2,1.2,1.2",
        "--init-sigma", "1,1,1", "--init-mu", "8,20,22",
    ]);
    let init = em::SymmetricMixtureInit {
        omega: vec![0.1, 0.35, 0.55],
        alpha: vec![1.2; 3],
        sigma: vec![1.0; 3],
        mu: vec![8.0, 20.0, 22.0],
    };
    let r = em::fit_symmetric_mixture(&datasets::GALAXY, 3, &init, &em::EmConfig::default()).unwrap();
    assert_eq!(v["loglik"].as_f64().unwrap(), r.loglik());
    assert_eq!(floats(&v["estimates"]["omega"]), r.estimates.weights);
    assert_eq!(v["estimates"]["components"][2]["alpha"].as_f64().unwrap(), r.estimates.components[2].alpha);
    assert_eq!(v["iterations"].as_u64().unwrap() as usize, r.iterations);
    assert!(v["gof"]["ks"].as_f64().unwrap() < 0.06);
}

#[test]
fn bivariate_fits_from_file() {
    let mut text = String::from("x,y\n");
    let p = stablekit::EllipticalParams::new(1.7, nalgebra::DMatrix::identity(2, 2), nalgebra::DVector::zeros(2)).unwrap();
    let z = stablekit::simulate::rstable_elliptical(240, &p, &RngStream::new(3, 0)).unwrap();
    for r in z.row_iter() {
        text.push_str(&format!("{},{}\n", r[0], r[1]));
    }
    let f = csv_file(&text);
    let path = f.path().to_str().unwrap();
    let v = json(&["fit", "elliptical", "--file", path, "--init-alpha", "1.5", "--init-dispersion", "1,0;0,1", "--init-mu", "0,0", "--max-iter", "2"]);
    assert_eq!(v["estimates"]["sigma"].as_array().unwrap().len(), 2);
    assert!(v["iterations"].as_u64().unwrap() <= 2);
    let s = json(&["fit", "spectral", "--file", path, "--m", "4"]);
    assert_eq!(s["estimates"]["masses"].as_array().unwrap().len(), 4);
}

#[test]
fn plot_data_counts_every_observation() {
    let out = run(&["plot-data", "--dataset", "guinea_pigs", "--alpha", "1", "--beta", "0.5", "--sigma", "40", "--mu", "150", "--bins", "12", "--points", "50"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("section,x,value"));
    let (mut pdf, mut total) = (0, 0.0);
    for l in lines {
        let cells: Vec<&str> = l.split(',').collect();
        match cells[0] {
            "pdf" => pdf += 1,
            "hist" => total += cells[2].parse::<f64>().unwrap(),
            other => panic!("unexpected section {other}"),
        }
    }
    assert_eq!(pdf, 50);
    assert_eq!(total, 72.0);
}
