//! Acceptance criteria 1–10, one PASS/FAIL line each.
//!
//! Everything goes through the `instanton` binary. Tolerances are pinned
//! here rather than read from the report, so loosening a library constant
//! cannot turn a line green.

use std::process::{Command, ExitCode, Output};

use serde_json::Value;

fn instanton(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_instanton"))
        .args(args)
        .output()
        .expect("binary runs")
}

struct Report {
    json: Value,
    code: Option<i32>,
}

impl Report {
    fn run(args: &[&str]) -> Self {
        let mut full = vec!["verify"];
        full.extend_from_slice(args);
        let o = instanton(&full);
        let json = serde_json::from_slice(&o.stdout).unwrap_or(Value::Null);
        Self {
            json,
            code: o.status.code(),
        }
    }

    fn check(&self, name: &str) -> Option<&Value> {
        self.json["checks"]
            .as_array()?
            .iter()
            .find(|c| c["name"] == name)
    }
}

/// One bound on one check of a report.
struct Bound<'a> {
    report: &'a Report,
    check: &'static str,
    tol: f64,
    min_samples: u64,
}

impl Bound<'_> {
    /// `(ok, summary)`; a null residual (NaN or ∞ in the report) fails.
    fn eval(&self) -> (bool, String) {
        let Some(c) = self.report.check(self.check) else {
            return (false, format!("{} missing", self.check));
        };
        let max = c["max_residual"].as_f64();
        let samples = c["samples"].as_u64().unwrap_or(0);
        let ok = max.is_some_and(|m| m <= self.tol)
            && c["passed"] == true
            && samples >= self.min_samples;
        let shown = max.map_or("NaN".into(), |m| format!("{m:.2e}"));
        (
            ok,
            format!("{} {shown} <= {:.0e} (n={samples})", self.check, self.tol),
        )
    }
}

fn bounds(bs: &[Bound]) -> (bool, String) {
    let parts: Vec<(bool, String)> = bs.iter().map(Bound::eval).collect();
    let ok = parts.iter().all(|(ok, _)| *ok);
    let text = parts
        .into_iter()
        .map(|(_, s)| s)
        .collect::<Vec<_>>()
        .join("; ");
    (ok, text)
}

fn b<'a>(report: &'a Report, check: &'static str, tol: f64, min_samples: u64) -> Bound<'a> {
    Bound {
        report,
        check,
        tol,
        min_samples,
    }
}

fn criterion_10() -> (bool, String) {
    let args = [
        "verify",
        "--lambdas",
        "0,1,4",
        "--samples",
        "100",
        "--seed",
        "7",
    ];
    let first = instanton(&args);
    let second = instanton(&args);
    let identical = first.stdout == second.stdout && !first.stdout.is_empty();
    let bad = instanton(&["verify", "--lambdas", "4,1,0"]);
    let message =
        String::from_utf8_lossy(&bad.stderr).contains("focal constants must be nondecreasing");
    let flat = instanton(&["verify", "--lambdas", "0,0,0"]).status.code();
    let failing = instanton(&["verify", "--samples", "5", "--h", "0.2"]);
    let failing_reported =
        serde_json::from_slice::<Value>(&failing.stdout).is_ok_and(|v| v["passed"] == false);
    let codes = [
        first.status.code(),
        bad.status.code(),
        flat,
        failing.status.code(),
    ];
    let ok =
        identical && codes == [Some(0), Some(2), Some(0), Some(1)] && message && failing_reported;
    (
        ok,
        format!(
            "repeat byte-identical {identical}; exit codes distinct/unordered/flat/failing {codes:?} \
             (want 0/2/0/1); unordered message {message}; failing run still reports {failing_reported}"
        ),
    )
}

fn main() -> ExitCode {
    let main = Report::run(&[
        "--lambdas",
        "0,1,4",
        "--samples",
        "100",
        "--seed",
        "7",
        "--h",
        "1e-3",
        "--tol",
        "1e-10",
    ]);
    let flat = Report::run(&["--lambdas", "0,0,0", "--samples", "100", "--seed", "7"]);
    let pair = Report::run(&["--lambdas", "0,4,4", "--samples", "100", "--seed", "7"]);

    let orientation = main.json["curl_orientation"].as_f64();
    let one_sign = matches!(orientation, Some(s) if s.abs() == 1.0);

    let mut results: Vec<(u32, &str, (bool, String))> = vec![
        (
            1,
            "harmonicity",
            bounds(&[b(&main, "harmonicity", 1e-4, 100)]),
        ),
        (2, "field equation", {
            let (ok, s) = bounds(&[b(&main, "field_equation", 1e-4, 100)]);
            (ok && one_sign, format!("{s}; global sign {orientation:?}"))
        }),
        (
            3,
            "group/moment-map equivalence",
            bounds(&[b(&main, "potential_equivalence", 1e-8, 1000)]),
        ),
        (
            4,
            "quadric and round trip",
            bounds(&[
                b(&main, "quadric_identity", 1e-10, 1000),
                b(&main, "round_trip", 1e-8, 1000),
            ]),
        ),
        (5, "special cases", {
            let (ok, s) = bounds(&[
                b(&flat, "flat_potential", 1e-10, 1),
                b(&pair, "two_centre_potential", 1e-6, 100),
            ]);
            let codes = (flat.code, pair.code);
            (
                ok && codes == (Some(0), Some(0)),
                format!("{s}; exit codes {codes:?}"),
            )
        }),
        (
            6,
            "HJ separation",
            bounds(&[
                b(&main, "geodesic_energy", 1e-8, 1),
                b(&main, "separation_constants_drift", 1e-6, 1),
                b(&main, "separation_collinearity", 1e-8, 1),
                b(&main, "separation_inverse", 1e-10, 1),
            ]),
        ),
        (
            7,
            "charged runs",
            bounds(&[b(&main, "charged_energy", 1e-8, 1)]),
        ),
        (8, "Schrödinger separability", {
            // the check's verdict also requires the residual to grow when a is offset
            let (ok, s) = bounds(&[b(&main, "wave_separation", 1e-3, 150)]);
            let note = main
                .check("wave_separation")
                .and_then(|c| c["note"].as_str())
                .unwrap_or("");
            (ok, format!("{s}; {note}"))
        }),
        (
            9,
            "group and profile identities",
            bounds(&[
                b(&main, "group_orthogonality", 1e-12, 1),
                b(&main, "group_left_derivative", 1e-6, 1),
                b(&main, "profile_ode", 1e-8, 1),
            ]),
        ),
    ];
    results.push((10, "CLI determinism", criterion_10()));

    let mut all = true;
    for (n, title, (ok, detail)) in &results {
        all &= ok;
        println!(
            "{} {n:>2} {title}: {detail}",
            if *ok { "PASS" } else { "FAIL" }
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
