//! Command line driver: parses JSON descriptions of groups and affine
//! n-valued maps, runs the analyses and the brute-force oracles, and emits
//! text or JSON reports.
//!
//! Exit codes: 0 on success, 1 on validation failure or mathematically
//! invalid input, 2 on malformed input.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::{json, Value};

use nilfix_core::error::Error;
use nilfix_core::io;
use nilfix_core::twisted::{
    oracle_abelian_classes, oracle_nilpotent_over_bounds, reidemeister_abelian,
    reidemeister_full, reidemeister_product, setup_for_endomorphism,
};
use nilfix_core::ExtendedCount;

#[derive(Parser)]
#[command(
    name = "nilfix",
    version,
    about = "Exact Reidemeister and Nielsen numbers of affine n-valued maps on nilmanifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct CommonArgs {
    /// Input JSON file
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
    /// Output format
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Sample count for the randomized checks
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Seed for the randomized checks
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Coordinate box bound for the nilpotent class oracle
    #[arg(long = "box", default_value_t = 5)]
    box_bound: i64,
}

#[derive(Subcommand)]
enum Command {
    /// Run group-axiom, homomorphism, disjointness and cocycle checks
    Validate(CommonArgs),
    /// Compute Reidemeister and Nielsen numbers with per-component reports
    Analyze(CommonArgs),
    /// Enumerate the fixed points of an affine n-valued map on a torus
    #[command(name = "fixed-points")]
    FixedPoints {
        #[command(flatten)]
        common: CommonArgs,
        /// Skip lifts with det(I - M) = 0 instead of failing
        #[arg(long)]
        skip_singular: bool,
    },
    /// Run the brute-force class-count oracles against the formulas
    Oracle(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate(common) => run(&common, validate),
        Command::Analyze(common) => run(&common, analyze),
        Command::FixedPoints { common, skip_singular } => {
            run(&common, |v, c| fixed_points(v, c, skip_singular))
        }
        Command::Oracle(common) => run(&common, oracle),
    };
    ExitCode::from(code)
}

fn exit_code_for(err: &Error) -> u8 {
    if err.is_malformed_input() {
        2
    } else {
        1
    }
}

fn run(common: &CommonArgs, body: impl Fn(&Value, &CommonArgs) -> Result<u8, Error>) -> u8 {
    let text = match std::fs::read_to_string(&common.input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", common.input.display());
            return 2;
        }
    };
    let value = match io::parse_json(&text) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match body(&value, common) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn emit(common: &CommonArgs, value: &Value, text: &str) {
    match common.format {
        Format::Json => println!("{}", serde_json::to_string(value).expect("serializable")),
        Format::Text => print!("{text}"),
    }
}

fn analyze(value: &Value, common: &CommonArgs) -> Result<u8, Error> {
    let map = io::map_from_value(value)?;
    let report = map.analyze()?;
    emit(common, &io::map_report_to_value(&report), &io::map_report_to_text(&report));
    Ok(0)
}

fn fixed_points(value: &Value, common: &CommonArgs, skip_singular: bool) -> Result<u8, Error> {
    let map = io::map_from_value(value)?;
    let points = nilfix_core::enumerate_fixed_points(&map, skip_singular)?;
    emit(common, &io::fixed_points_to_value(&points), &io::fixed_points_to_text(&points));
    Ok(0)
}

fn validate(value: &Value, common: &CommonArgs) -> Result<u8, Error> {
    let is_map = value.as_object().is_some_and(|o| o.contains_key("lifts"));

    let mut text = String::new();
    let mut passed = true;

    if !is_map {
        let p = io::presentation_from_value(value)?;
        let axioms = p.check_group_axioms(common.samples, common.seed);
        passed &= axioms.passed();
        let report = json!({
            "passed": axioms.passed(),
            "group_axioms": axiom_value(&axioms),
        });
        text.push_str(&axiom_text(&axioms));
        text.push_str(if passed { "validation: PASS\n" } else { "validation: FAIL\n" });
        emit(common, &report, &text);
        return Ok(if passed { 0 } else { 1 });
    }

    let map = io::map_from_value(value)?;
    let p = map.presentation();

    let axioms = p.check_group_axioms(common.samples, common.seed);
    passed &= axioms.passed();
    text.push_str(&axiom_text(&axioms));

    let mut hom_values = Vec::new();
    for (i, lift) in map.lifts().iter().enumerate() {
        let hom = lift.linear_part.validate_homomorphism(common.samples, common.seed);
        passed &= hom.passed();
        text.push_str(&format!(
            "lift {} homomorphism: {}\n",
            i + 1,
            if hom.passed() { "pass" } else { "FAIL" }
        ));
        for f in &hom.failures {
            text.push_str(&format!("    {}\n", f.witness));
        }
        hom_values.push(json!({
            "lift": i + 1,
            "passed": hom.passed(),
            "failures": hom.failures.iter().map(|f| f.witness.clone()).collect::<Vec<_>>(),
        }));
    }

    let disjoint = map.validate_disjointness(common.samples, common.seed);
    passed &= disjoint.passed();
    text.push_str(&format!(
        "disjointness: {} ({} exact pairs, {} sampled pairs)\n",
        if disjoint.passed() { "pass" } else { "FAIL" },
        disjoint.exact_pairs,
        disjoint.sampled_pairs
    ));
    let disjoint_value = json!({
        "passed": disjoint.passed(),
        "exact_pairs": disjoint.exact_pairs,
        "sampled_pairs": disjoint.sampled_pairs,
        "violations": disjoint.violations.iter().map(|v| {
            let mut item = json!({"pair": [v.pair.0 + 1, v.pair.1 + 1]});
            if let Some(w) = &v.witness {
                item["witness"] = Value::String(w.clone());
            }
            item
        }).collect::<Vec<_>>(),
    });
    for v in &disjoint.violations {
        text.push_str(&format!(
            "    lifts {} and {} collide{}\n",
            v.pair.0 + 1,
            v.pair.1 + 1,
            v.witness.as_deref().map(|w| format!(" at {w}")).unwrap_or_default()
        ));
    }

    let (sigma_value, cocycle_value) = match map.compute_sigma() {
        Ok(sigma) => {
            text.push_str("sigma data: computed\n");
            let cocycle = map.sigma_cocycle_check(&sigma, common.samples, common.seed)?;
            passed &= cocycle.passed();
            text.push_str(&format!(
                "cocycle identity: {} ({} pairs)\n",
                if cocycle.passed() { "pass" } else { "FAIL" },
                cocycle.pairs_checked
            ));
            for v in &cocycle.violations {
                text.push_str(&format!("    {}\n", v.description));
            }
            (
                json!({"computed": true}),
                json!({
                    "passed": cocycle.passed(),
                    "pairs_checked": cocycle.pairs_checked,
                    "violations": cocycle.violations.iter()
                        .map(|v| v.description.clone()).collect::<Vec<_>>(),
                }),
            )
        }
        Err(e) => {
            passed = false;
            text.push_str(&format!("sigma data: FAIL ({e})\n"));
            (json!({"computed": false, "error": e.to_string()}), Value::Null)
        }
    };

    text.push_str(if passed { "validation: PASS\n" } else { "validation: FAIL\n" });
    let report = json!({
        "passed": passed,
        "group_axioms": axiom_value(&axioms),
        "homomorphisms": hom_values,
        "disjointness": disjoint_value,
        "sigma": sigma_value,
        "cocycle": cocycle_value,
    });
    emit(common, &report, &text);
    Ok(if passed { 0 } else { 1 })
}

fn axiom_value(report: &nilfix_core::AxiomReport) -> Value {
    json!({
        "passed": report.passed(),
        "samples": report.samples,
        "failures": report.failures.iter()
            .map(|f| format!("{}: {}", f.axiom, f.witness)).collect::<Vec<_>>(),
    })
}

fn axiom_text(report: &nilfix_core::AxiomReport) -> String {
    let mut out = format!(
        "group axioms: {} ({} samples)\n",
        if report.passed() { "pass" } else { "FAIL" },
        report.samples
    );
    for f in &report.failures {
        out.push_str(&format!("    {}: {}\n", f.axiom, f.witness));
    }
    out
}

fn count_str(c: &ExtendedCount) -> String {
    c.to_string()
}

fn oracle(value: &Value, common: &CommonArgs) -> Result<u8, Error> {
    match io::oracle_request_from_value(value)? {
        io::OracleRequest::Abelian(datum) => {
            let formula = reidemeister_abelian(&datum);
            if formula.is_infinite() {
                let report = json!({
                    "formula": "infinite",
                    "note": "det(I - M) = 0; enumeration oracles require a finite count",
                });
                emit(
                    common,
                    &report,
                    "formula: infinite (det(I - M) = 0; oracles skipped)\n",
                );
                return Ok(0);
            }
            let box_count = oracle_abelian_classes(&datum)?;
            let residue_count =
                nilfix_core::brute_force_reidemeister_z_k(datum.b(), datum.m())?;
            let agree = formula == ExtendedCount::Finite(box_count.clone())
                && box_count == residue_count;
            let report = json!({
                "formula": count_str(&formula),
                "box_oracle": box_count.to_string(),
                "residue_oracle": residue_count.to_string(),
                "agree": agree,
            });
            let text = format!(
                "formula: {}\nbox oracle: {}\nresidue oracle: {}\nagree: {}\n",
                count_str(&formula),
                box_count,
                residue_count,
                if agree { "yes" } else { "NO" }
            );
            emit(common, &report, &text);
            Ok(if agree { 0 } else { 1 })
        }
        io::OracleRequest::Nilpotent(phi) => {
            if phi.has_eigenvalue_one() {
                let report = json!({
                    "formula": "infinite",
                    "note": "some layer matrix has eigenvalue 1; the box oracle requires finiteness",
                });
                emit(
                    common,
                    &report,
                    "formula: infinite (eigenvalue 1; box oracle skipped)\n",
                );
                return Ok(0);
            }
            let setup = setup_for_endomorphism(&phi)?;
            let formula = reidemeister_product(&setup);
            let lo = (common.box_bound - 2).max(2);
            let bounds: Vec<i64> = (lo..=common.box_bound).collect();
            let counts = oracle_nilpotent_over_bounds(&phi, &bounds)?;
            let last = counts.last().map(|&(_, c)| c).unwrap_or(0);
            let stabilized =
                counts.len() >= 3 && counts.iter().all(|&(_, c)| c == last);
            let agree = formula == ExtendedCount::Finite(BigUint::from(last));
            let report = json!({
                "formula": count_str(&formula),
                "boxes": counts.iter()
                    .map(|&(b, c)| json!({"bound": b, "classes": c}))
                    .collect::<Vec<_>>(),
                "stabilized": stabilized,
                "agree": agree,
            });
            let mut text = format!("formula: {}\n", count_str(&formula));
            for &(b, c) in &counts {
                text.push_str(&format!("box {b}: {c} classes\n"));
            }
            text.push_str(&format!(
                "stabilized: {}\nagree: {}\n",
                if stabilized { "yes" } else { "no" },
                if agree { "yes" } else { "NO" }
            ));
            emit(common, &report, &text);
            Ok(if agree { 0 } else { 1 })
        }
        io::OracleRequest::Product(setup) => {
            let mut layer_values = Vec::new();
            let mut text = String::new();
            let mut index = BigUint::from(1u32);
            let mut all_agree = true;
            for (i, layer) in setup.layers().iter().enumerate() {
                let r = reidemeister_abelian(layer);
                use num_bigint::Sign;
                let (sign, b_abs) = layer.b().det()?.into_parts();
                assert!(sign != Sign::NoSign, "layer invariant guarantees det(B) != 0");
                index *= &b_abs;
                let oracle_count = if !r.is_infinite() && layer.rank() <= 3 {
                    match oracle_abelian_classes(layer) {
                        Ok(c) => {
                            all_agree &= r == ExtendedCount::Finite(c.clone());
                            Some(c)
                        }
                        Err(_) => None,
                    }
                } else {
                    None
                };
                text.push_str(&format!(
                    "layer {}: R = {}{}\n",
                    i + 1,
                    count_str(&r),
                    oracle_count
                        .as_ref()
                        .map(|c| format!(", oracle = {c}"))
                        .unwrap_or_default()
                ));
                layer_values.push(json!({
                    "layer": i + 1,
                    "R": count_str(&r),
                    "oracle": oracle_count.map(|c| c.to_string()),
                }));
            }
            let product = reidemeister_product(&setup);
            let full = reidemeister_full(&index, &setup)?;
            all_agree &= product == full;
            text.push_str(&format!(
                "product: {}\nindex form ([N:H] = {}): {}\nagree: {}\n",
                count_str(&product),
                index,
                count_str(&full),
                if all_agree { "yes" } else { "NO" }
            ));
            let report = json!({
                "layers": layer_values,
                "product": count_str(&product),
                "index": index.to_string(),
                "full": count_str(&full),
                "agree": all_agree,
            });
            emit(common, &report, &text);
            Ok(if all_agree { 0 } else { 1 })
        }
    }
}
