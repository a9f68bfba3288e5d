//! Human and JSON renderings of command results.

use chatelet_core::global::GlobalReport;
use chatelet_core::hilbert::ConicCertificate;
use chatelet_core::verify::SuiteReport;
use chatelet_core::{LocalChowResult, Outcome, Route, SymbolValue};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Format {
    Human,
    Json,
}

fn emit_json<T: Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("reports serialize"));
}

/// The result object shared by `classify` and `witness`.
pub fn result_json(r: &LocalChowResult) -> Value {
    let mut v = serde_json::to_value(r).expect("reports serialize");
    v["reason"] = Value::String(r.provenance.description().to_owned());
    v
}

fn print_witness(r: &LocalChowResult) {
    if let Some(w) = &r.witness {
        let c = &w.certificate;
        println!("witness: x = {}", w.x);
        println!("chi(x) = {}", w.chi);
        println!(
            "norm checks: x(x^2 - e) in N: {}, x in N: {}, x^2 - e in N: {}",
            c.product_is_norm, c.first_is_norm, c.second_is_norm
        );
    }
}

pub fn classification(format: Format, r: &LocalChowResult) {
    match format {
        Format::Json => emit_json(&result_json(r)),
        Format::Human => {
            println!("{r}");
            print_witness(r);
            if let Some(cert) = &r.root_certificate {
                println!(
                    "roots in Q_{}: {} (discriminant valuation {}, {} balls)",
                    r.p,
                    cert.roots.len(),
                    cert.discriminant_valuation
                        .map_or_else(|| format!(">= {}", cert.working_digits), |v| v.to_string()),
                    cert.nodes_examined
                );
            }
        }
    }
}

pub fn hilbert(
    format: Format,
    p: u64,
    a: &str,
    b: &str,
    value: SymbolValue,
    route: Route,
    oracle: Option<&ConicCertificate>,
) {
    match format {
        Format::Json => {
            let mut v = json!({ "p": p, "a": a, "b": b, "value": value, "route": route });
            if let Some(c) = oracle {
                v["oracle"] = serde_json::to_value(c).expect("reports serialize");
            }
            emit_json(&v);
        }
        Format::Human => {
            println!("{value} ({route})");
            if let Some(c) = oracle {
                match c.point {
                    Some([x, y, z]) => println!(
                        "conic search: {} via primitive point ({x}, {y}, {z}) at depth {}",
                        c.value, c.depth
                    ),
                    None => println!(
                        "conic search: {} (no primitive point mod p^{}, {} candidates)",
                        c.value, c.depth, c.examined
                    ),
                }
            }
        }
    }
}

pub fn witness(format: Format, r: &LocalChowResult) {
    match format {
        Format::Json => emit_json(&result_json(r)),
        Format::Human => {
            if r.witness.is_some() {
                print_witness(r);
                println!("A_0(X)_0 = {r}");
            } else if r.outcome == Outcome::Zero {
                println!("no witness: A_0(X)_0 = {r}");
            } else {
                println!("no witness: {r}");
            }
        }
    }
}

pub fn global(format: Format, report: &GlobalReport) {
    match format {
        Format::Json => emit_json(&report.places),
        Format::Human => {
            println!("d = {}, e = {}", report.d, report.e);
            let bad: Vec<String> = report.bad_places.iter().map(u64::to_string).collect();
            println!("bad primes: {}", bad.join(", "));
            for pr in &report.places {
                println!("{:>6}: {} ({})", pr.place.to_string(), pr.outcome, pr.reason);
            }
            println!("note: {}", report.disclaimer);
        }
    }
}

pub fn verify(format: Format, reports: &[SuiteReport]) {
    match format {
        Format::Json => emit_json(&reports),
        Format::Human => {
            for r in reports {
                let status = if r.passed { "pass" } else { "FAIL" };
                println!(
                    "{status} {:<14} {} checks, {} failures",
                    r.suite.name(),
                    r.checks,
                    r.failure_count
                );
                for f in &r.failures {
                    println!("    {f}");
                }
                if !r.witnesses.is_empty() {
                    println!("    {:>3} {:>4} {:>8} {:>6} {:>10} chi", "p", "d", "e", "A0", "x");
                    for w in &r.witnesses {
                        println!(
                            "    {:>3} {:>4} {:>8} {:>6} {:>10} {}",
                            w.p,
                            w.d,
                            w.e,
                            w.outcome.to_string(),
                            w.x.as_deref().unwrap_or("-"),
                            w.chi.map(|c| c.to_string()).unwrap_or_else(|| "-".into())
                        );
                    }
                }
            }
        }
    }
}
