use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};

use rayon::prelude::*;
use serde_json::{json, Value};

use ltfsketch::boolean_fn::{
    chow_defines_self, chow_parameters, classify_balanced_ltf4, epsilon0, epsilon_star,
    wmon_chow_certificate, wmon_chow_closed_form, BooleanFunction, LtfSpec, WmonCertificate,
    MAX_ARITY,
};
use ltfsketch::csp::{
    planted_instance, random_assignment, random_instance, read_instance, write_instance,
    Assignment, InstanceReader, Predicate,
};
use ltfsketch::monarchy::{
    build_monarchy_lp, comb_identity_residual, decide_monarchy, hand_k4_certificate, implied_bound,
    verify_certificate, verify_witness, witness, CertificateFile, MonarchyOutcome,
    ReducedDistribution, Verdict, WitnessReport,
};
use ltfsketch::rational::{
    display, format_decimal, format_rational, int, parse_rational, rat, to_f64, Rational,
};
use ltfsketch::sketch::{algorithm1, b_norm_exact, Algorithm1, BiasMode, PredicateProfile};

use crate::predicate::{parse_ltf, Named, PredicateArgs};
use crate::{Cli, Command, Report};

type Res<T> = Result<T, String>;

fn e2s(e: ltfsketch::Error) -> String {
    e.to_string()
}

/// Exact value plus a 12-significant-digit decimal.
fn jr(r: &Rational) -> Value {
    json!({ "exact": format_rational(r), "decimal": format_decimal(to_f64(r)) })
}

fn jrs(rs: &[Rational]) -> Value {
    Value::Array(rs.iter().map(jr).collect())
}

fn list(rs: &[Rational]) -> String {
    rs.iter()
        .map(format_rational)
        .collect::<Vec<_>>()
        .join(", ")
}

fn parse_eps(s: &str) -> Res<Rational> {
    parse_rational(s).ok_or_else(|| format!("bad ε {s:?}"))
}

fn sweep(first: &[usize], to: Option<usize>) -> Vec<usize> {
    let mut ks = first.to_vec();
    if let (Some(&last), Some(to)) = (first.last(), to) {
        ks.extend(last + 1..=to);
    }
    ks
}

fn open(path: &str) -> Res<Box<dyn BufRead>> {
    if path == "-" {
        Ok(Box::new(BufReader::new(io::stdin())))
    } else {
        let f = File::open(path).map_err(|e| format!("{path}: {e}"))?;
        Ok(Box::new(BufReader::new(f)))
    }
}

fn read_all(path: &str) -> Res<String> {
    let mut s = String::new();
    open(path)?
        .read_to_string(&mut s)
        .map_err(|e| format!("{path}: {e}"))?;
    Ok(s)
}

fn check_k(k: usize, cli: &Cli) -> Res<()> {
    if k > cli.max_k {
        return Err(format!("k = {k} exceeds --max-k {}", cli.max_k));
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Res<Report> {
    match &cli.command {
        Command::Chow { predicate } => chow(cli, predicate),
        Command::Decide { k, to, cert_out } => decide(cli, &sweep(k, *to), cert_out.as_deref()),
        Command::Witness { k, to, out } => witness_cmd(cli, &sweep(k, *to), out.as_deref()),
        Command::VerifyCert { file } => verify_cert(file),
        Command::Sketch {
            predicate,
            eps,
            seed,
            trials,
            exact_b,
            input,
        } => sketch(predicate, eps, *seed, *trials, *exact_b, input),
        Command::Bounds { input, eps } => bounds(input, eps),
        Command::Identity { m, to } => identity(&sweep(m, *to)),
        Command::Classify4 { weights } => classify4(weights),
        Command::Gen {
            predicate,
            n,
            m,
            seed,
            planted,
            out,
        } => gen(predicate, *n, *m, *seed, planted.as_deref(), out.as_deref()),
    }
}

fn chow(cli: &Cli, args: &PredicateArgs) -> Res<Report> {
    if let Some(k) = args.requested_arity() {
        check_k(k, cli)?;
    }
    let mut text = Vec::new();
    let mut out = serde_json::Map::new();
    let mut passed = true;

    if let Named::Wmon(k, j) = args.named() {
        let (p, c) = wmon_chow_closed_form(k, j).map_err(e2s)?;
        let ratio = &p / &c;
        text.push(format!("wmon k={k} j={j}"));
        text.push(format!("president: {}", display(&p)));
        text.push(format!("citizen:   {}", display(&c)));
        text.push(format!("ratio:     {}", display(&ratio)));
        let cert = wmon_chow_certificate(k, j).map_err(e2s)?;
        let cert_name = match &cert {
            WmonCertificate::TableCertified => "table",
            WmonCertificate::RatioCertified { .. } => "ratio",
            WmonCertificate::NotCertified { .. } => "none",
        };
        text.push(format!("chow self-definition certified by: {cert_name}"));
        out.insert(
            "closed_form".into(),
            json!({ "president": jr(&p), "citizen": jr(&c), "ratio": jr(&ratio) }),
        );
        out.insert("certificate".into(), json!(cert_name));
        if k > MAX_ARITY {
            text.push(format!("k > {MAX_ARITY}: truth-table quantities skipped"));
            return Ok(Report::new(text, Value::Object(out), true));
        }
        let brute = chow_parameters(&args.resolve()?.function().clone());
        let agrees = brute.degree1[0] == p && brute.degree1[1..].iter().all(|x| *x == c);
        text.push(format!("closed form matches brute force: {agrees}"));
        out.insert("closed_form_matches".into(), json!(agrees));
        passed &= agrees;
    }

    let pred = args.resolve()?;
    let f = pred.function();
    let chow = chow_parameters(f);
    text.push(format!("predicate: {pred}"));
    text.push(format!("k: {}", f.arity()));
    text.push(format!("rho: {}", display(&f.rho())));
    text.push(format!("chow degree 0: {}", display(&chow.degree0)));
    text.push(format!("chow degree 1: {}", list(&chow.degree1)));
    out.insert("predicate".into(), json!(pred.to_string()));
    out.insert("k".into(), json!(f.arity()));
    out.insert("rho".into(), jr(&f.rho()));
    out.insert("chow_degree0".into(), jr(&chow.degree0));
    out.insert("chow_degree1".into(), jrs(&chow.degree1));
    match (epsilon0(f), epsilon_star(f)) {
        (Ok(e0), Ok(es)) => {
            text.push(format!("eps0: {}", display(&e0)));
            text.push(format!("eps*: {}", display(&es)));
            out.insert("eps0".into(), jr(&e0));
            out.insert("eps_star".into(), jr(&es));
        }
        (Err(e), _) | (_, Err(e)) => {
            text.push(format!("eps0: undefined ({e})"));
            out.insert("eps0".into(), Value::Null);
            out.insert("eps_star".into(), Value::Null);
        }
    }
    let selfdef = chow_defines_self(f);
    text.push(format!("chow defines self: {selfdef}"));
    out.insert("chow_defines_self".into(), json!(selfdef));
    Ok(Report::new(text, Value::Object(out), passed))
}

struct DecideRow {
    text: Vec<String>,
    json: Value,
    passed: bool,
    cert: CertificateFile,
}

fn decide_one(k: usize) -> Res<DecideRow> {
    let d = decide_monarchy(k).map_err(e2s)?;
    let cert = d.to_certificate();
    let replay = verify_certificate(&cert).map_err(e2s)?;
    let verdict = match d.verdict {
        Verdict::Approximable => "approximable",
        Verdict::Resistant => "resistant",
    };
    let mut text = vec![format!("k={k}: {verdict}")];
    let mut passed = replay.valid;
    let mut json = json!({
        "k": k,
        "verdict": verdict,
        "certificate": &cert,
        "replay_valid": replay.valid,
        "replay_detail": &replay.detail,
    });
    if let Some(b) = &d.implied_bound {
        text.push(format!(
            "  certificate implies {}*mu1 + {}*mu' <= {} on the no side (yes side needs >= 1)",
            k - 2,
            k - 1,
            display(b)
        ));
        json["implied_bound"] = jr(b);
        passed &= *b < int(1);
    }
    if let MonarchyOutcome::Feasible { witness } = &d.outcome {
        text.push(format!("  LP witness u: {}", list(witness.u())));
        text.push(format!("  LP witness v: {}", list(witness.v())));
    }
    text.push(format!("  replay: {}", replay.detail));
    if k == 4 {
        let m = build_monarchy_lp(4);
        let hand = hand_k4_certificate(&m);
        let ok = m.lp.check_farkas(&hand).is_ok();
        let bound = implied_bound(&m, &hand);
        let shown = bound
            .as_ref()
            .map(format_rational)
            .unwrap_or_else(|| "-".into());
        text.push(format!(
            "  hand multipliers 3, -13/6, 2/3: valid={ok}, bound {shown}"
        ));
        json["hand_certificate"] = json!({ "valid": ok, "implied_bound": bound.as_ref().map(jr) });
        passed &= ok && bound == Some(rat(2, 3));
    }
    if k >= 5 {
        let w = witness(k).map_err(e2s)?;
        let report = verify_witness(&w, k);
        let lp_rows = build_monarchy_lp(k).check_witness(&w);
        let ok = report.passed() && lp_rows.is_empty();
        text.push(format!(
            "  explicit witness: conditions {} and LP rows {}",
            pass(report.passed()),
            pass(lp_rows.is_empty())
        ));
        json["explicit_witness"] =
            json!({ "conditions": report.passed(), "lp_rows_ok": lp_rows.is_empty() });
        passed &= ok && d.verdict == Verdict::Resistant;
    } else {
        passed &= d.verdict == Verdict::Approximable;
    }
    Ok(DecideRow {
        text,
        json,
        passed,
        cert,
    })
}

fn pass(b: bool) -> &'static str {
    if b {
        "hold"
    } else {
        "FAIL"
    }
}

fn decide(cli: &Cli, ks: &[usize], cert_out: Option<&std::path::Path>) -> Res<Report> {
    for &k in ks {
        if k < 2 {
            return Err(format!("k = {k}: monarchies need k >= 2"));
        }
        check_k(k, cli)?;
    }
    if cert_out.is_some() && ks.len() != 1 {
        return Err("--cert-out needs exactly one k".into());
    }
    let rows = ks
        .par_iter()
        .map(|&k| decide_one(k))
        .collect::<Res<Vec<_>>>()?;
    if let Some(path) = cert_out {
        let s = serde_json::to_string_pretty(&rows[0].cert).expect("certificate serializes");
        std::fs::write(path, s + "\n").map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let passed = rows.iter().all(|r| r.passed);
    let text = rows.iter().flat_map(|r| r.text.clone()).collect();
    let outputs = Value::Array(rows.into_iter().map(|r| r.json).collect());
    Ok(Report::new(text, json!({ "results": outputs }), passed))
}

fn report_json(r: &WitnessReport) -> Value {
    json!({
        "condition_i": r.condition_i,
        "condition_ii": r.condition_ii,
        "condition_iii": r.condition_iii,
        "mass_residual": jr(&r.mass_residual),
        "min_entry": jr(&r.min_entry),
        "h_residual": r.h_residual.to_string(),
        "expansion_residual": r.expansion_residual.to_string(),
        "p1": jr(&r.p1),
        "p_prime": jr(&r.p_prime),
        "iii_slack": jr(&r.iii_slack),
    })
}

fn report_text(r: &WitnessReport) -> Vec<String> {
    vec![
        format!(
            "  (i)   distribution: {} (mass residual {}, min entry {})",
            pass(r.condition_i),
            format_rational(&r.mass_residual),
            format_rational(&r.min_entry)
        ),
        format!(
            "  (ii)  h constant 1/2: {} (residuals {} / {})",
            pass(r.condition_ii),
            r.h_residual,
            r.expansion_residual
        ),
        format!(
            "  (iii) p1 = {}, p' = {}, slack {}: {}",
            display(&r.p1),
            display(&r.p_prime),
            display(&r.iii_slack),
            pass(r.condition_iii)
        ),
    ]
}

fn witness_cmd(cli: &Cli, ks: &[usize], out: Option<&std::path::Path>) -> Res<Report> {
    for &k in ks {
        check_k(k, cli)?;
    }
    if out.is_some() && ks.len() != 1 {
        return Err("--out needs exactly one k".into());
    }
    let rows = ks
        .par_iter()
        .map(|&k| {
            let d = witness(k).map_err(e2s)?;
            Ok((k, verify_witness(&d, k), d))
        })
        .collect::<Res<Vec<_>>>()?;
    if let Some(path) = out {
        std::fs::write(path, rows[0].2.to_string())
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let mut text = Vec::new();
    let mut results = Vec::new();
    for (k, r, d) in &rows {
        text.push(format!(
            "k={k}: {}",
            if r.passed() { "verified" } else { "FAILED" }
        ));
        text.push(format!("  u: {}", list(d.u())));
        text.push(format!("  v: {}", list(d.v())));
        text.extend(report_text(r));
        let mut j = report_json(r);
        j["k"] = json!(k);
        j["u"] = jrs(d.u());
        j["v"] = jrs(d.v());
        j["passed"] = json!(r.passed());
        results.push(j);
    }
    let passed = rows.iter().all(|(_, r, _)| r.passed());
    Ok(Report::new(text, json!({ "results": results }), passed))
}

fn verify_cert(path: &str) -> Res<Report> {
    let body = read_all(path)?;
    if body.trim_start().starts_with("rdist") {
        let d: ReducedDistribution = body.parse().map_err(e2s)?;
        let k = d.k();
        let r = verify_witness(&d, k);
        let rows = build_monarchy_lp(k).check_witness(&d);
        let mut text = vec![format!("rdist k={k}")];
        text.extend(report_text(&r));
        text.push(if rows.is_empty() {
            "  LP rows: all satisfied".into()
        } else {
            format!("  LP rows violated: {}", rows.join(", "))
        });
        let passed = r.passed() && rows.is_empty();
        text.push(if passed {
            "valid".into()
        } else {
            "INVALID".into()
        });
        let mut j = report_json(&r);
        j["k"] = json!(k);
        j["violated_rows"] = json!(rows);
        j["valid"] = json!(passed);
        return Ok(Report::new(text, j, passed));
    }
    let cert: CertificateFile = serde_json::from_str(&body).map_err(|e| format!("{path}: {e}"))?;
    let check = verify_certificate(&cert).map_err(e2s)?;
    let verdict = match check.verdict {
        Verdict::Approximable => "approximable",
        Verdict::Resistant => "resistant",
    };
    let mut text = vec![
        format!(
            "k={} {verdict}: {}",
            check.k,
            if check.valid { "valid" } else { "INVALID" }
        ),
        format!("  {}", check.detail),
    ];
    if let Some(b) = &check.implied_bound {
        text.push(format!("  implied bound {}", display(b)));
    }
    let j = json!({
        "k": check.k,
        "verdict": verdict,
        "valid": check.valid,
        "detail": check.detail,
        "implied_bound": check.implied_bound.as_ref().map(jr),
    });
    Ok(Report::new(text, j, check.valid))
}

fn ensure_same(given: &PredicateArgs, found: &Predicate) -> Res<()> {
    if given.is_given() && given.resolve()?.function() != found.function() {
        return Err(format!(
            "--predicate does not match the instance predicate `{found}`"
        ));
    }
    Ok(())
}

fn lower_median(mut xs: Vec<Rational>) -> Rational {
    xs.sort();
    xs[(xs.len() - 1) / 2].clone()
}

fn sketch(
    args: &PredicateArgs,
    eps: &str,
    seed: u64,
    trials: usize,
    exact_b: bool,
    input: &str,
) -> Res<Report> {
    let eps = parse_eps(eps)?;
    if trials == 0 {
        return Err("--trials must be at least 1".into());
    }
    let reader = InstanceReader::new(open(input)?).map_err(e2s)?;
    let pred = reader.predicate.clone();
    ensure_same(args, &pred)?;
    let f = pred.function().clone();
    let seeds: Vec<u64> = if exact_b {
        Vec::new()
    } else {
        (0..trials as u64).map(|t| seed.wrapping_add(t)).collect()
    };
    let mut runs = if exact_b {
        vec![Algorithm1::new(&f, &eps, BiasMode::Exact).map_err(e2s)?]
    } else {
        seeds
            .iter()
            .map(|&s| Algorithm1::new(&f, &eps, BiasMode::Sketch { seed: s }))
            .collect::<Result<Vec<_>, _>>()
            .map_err(e2s)?
    };
    let mut m = 0u64;
    for c in reader {
        let c = c.map_err(e2s)?;
        runs.par_iter_mut().for_each(|r| r.update(&c));
        m += 1;
    }
    let verdicts = runs
        .iter()
        .map(Algorithm1::finish)
        .collect::<Result<Vec<_>, _>>()
        .map_err(e2s)?;
    let v = lower_median(verdicts.iter().map(|x| x.v.clone()).collect());
    let chosen = verdicts
        .iter()
        .find(|x| x.v == v)
        .expect("median is one of the runs");
    let mut text = vec![format!(
        "v={} B={} delta={}",
        format_decimal(to_f64(&chosen.v)),
        format_decimal(to_f64(&chosen.b_tilde)),
        format_decimal(to_f64(&chosen.delta))
    )];
    text.extend(chosen.warnings.iter().map(|w| format!("warning: {w}")));
    let per_trial: Vec<Value> = verdicts
        .iter()
        .map(|x| json!({ "v": jr(&x.v), "b_tilde": jr(&x.b_tilde), "delta": jr(&x.delta) }))
        .collect();
    let outputs = json!({
        "predicate": pred.to_string(),
        "constraints": m,
        "mode": if exact_b { "exact" } else { "sketch" },
        "eps": jr(&eps),
        "eps_prime": jr(&chosen.eps_prime),
        "repetitions": chosen.repetitions,
        "v": jr(&chosen.v),
        "b_tilde": jr(&chosen.b_tilde),
        "delta": jr(&chosen.delta),
        "trials": per_trial,
        "warnings": &chosen.warnings,
    });
    let mut report = Report::new(text, outputs, true);
    report.seeds = seeds;
    Ok(report)
}

fn bounds(input: &str, eps: &str) -> Res<Report> {
    let eps = parse_eps(eps)?;
    let inst = read_instance(&read_all(input)?).map_err(e2s)?;
    let f = inst.function();
    let profile = PredicateProfile::new(f).map_err(e2s)?;
    let (val, sigma) = inst.brute_force_value().map_err(e2s)?;
    let b = b_norm_exact(&inst, &profile.lambda).map_err(e2s)?;
    let lower = profile.lower_bound(&b);
    let upper = profile.upper_bound(&b);
    let alg = algorithm1(inst.stream(), f, &eps, BiasMode::Exact).map_err(e2s)?;
    let selfdef = chow_defines_self(f);
    let guarantee = (&profile.rho + &profile.eps_star - &eps) * &val;

    let mut violations = Vec::new();
    if lower > val {
        violations.push("lower bound exceeds optimum");
    }
    if val > upper {
        violations.push("optimum exceeds upper bound");
    }
    if alg.v > val {
        violations.push("algorithm output exceeds optimum");
    }
    if alg.v < profile.rho {
        violations.push("algorithm output below rho");
    }
    if selfdef && alg.v < guarantee {
        violations.push("algorithm output below (rho + eps* - eps) * optimum");
    }
    let mut text = vec![
        format!(
            "instance: n={} m={} predicate {}",
            inst.n(),
            inst.m(),
            inst.predicate()
        ),
        format!("optimum: {} at {sigma}", display(&val)),
        format!("B: {}", display(&b)),
        format!("lower: {}", display(&lower)),
        format!("upper: {}", display(&upper)),
        format!(
            "algorithm (exact B, eps {}): v = {}",
            format_rational(&eps),
            display(&alg.v)
        ),
    ];
    if violations.is_empty() {
        text.push("sandwich holds".into());
    } else {
        text.extend(violations.iter().map(|v| format!("VIOLATION: {v}")));
    }
    let outputs = json!({
        "n": inst.n(),
        "m": inst.m(),
        "optimum": jr(&val),
        "argmax": sigma.to_string(),
        "b": jr(&b),
        "lower": jr(&lower),
        "upper": jr(&upper),
        "v": jr(&alg.v),
        "chow_defines_self": selfdef,
        "violations": violations,
    });
    Ok(Report::new(text, outputs, violations.is_empty()))
}

fn identity(ms: &[usize]) -> Res<Report> {
    if ms.contains(&0) {
        return Err("m must be at least 1".into());
    }
    let rows: Vec<(usize, String, bool)> = ms
        .par_iter()
        .map(|&m| {
            let r = comb_identity_residual(m);
            (m, r.to_string(), r.is_zero())
        })
        .collect();
    let text = rows
        .iter()
        .map(|(m, r, z)| {
            if *z {
                format!("m={m}: zero residual")
            } else {
                format!("m={m}: residual {r}")
            }
        })
        .collect();
    let results: Vec<Value> = rows
        .iter()
        .map(|(m, r, z)| json!({ "m": m, "zero": z, "residual": r }))
        .collect();
    let passed = rows.iter().all(|r| r.2);
    Ok(Report::new(text, json!({ "results": results }), passed))
}

fn classify4(weights: &[String]) -> Res<Report> {
    let spec: LtfSpec = parse_ltf(&weights.join(" "))?;
    let c = classify_balanced_ltf4(&spec).map_err(e2s)?;
    let class = format!("{:?}", c.class);
    let actual: BooleanFunction = spec.to_function().map_err(e2s)?;
    let agrees = c.materialize().map_err(e2s)? == actual;
    let text = vec![
        class.clone(),
        format!(
            "  order {:?}, negated {:?}, weights {}",
            c.permutation,
            c.negated,
            list(&c.normalized_weights)
        ),
        format!("  truth table agrees: {agrees}"),
    ];
    let outputs = json!({
        "class": class,
        "permutation": c.permutation,
        "negated": c.negated,
        "normalized_weights": jrs(&c.normalized_weights),
        "truth_table_agrees": agrees,
    });
    Ok(Report::new(text, outputs, agrees))
}

fn gen(
    args: &PredicateArgs,
    n: usize,
    m: usize,
    seed: u64,
    planted: Option<&str>,
    out: Option<&std::path::Path>,
) -> Res<Report> {
    let pred = args.resolve()?;
    let inst = match planted {
        None => random_instance(&pred, n, m, seed),
        Some(p) => {
            let sigma = if p == "random" {
                random_assignment(n, !seed)
            } else {
                let signs = p
                    .chars()
                    .map(|ch| match ch {
                        '+' => Ok(1),
                        '-' => Ok(-1),
                        _ => Err(format!("bad sign {ch:?} in --planted")),
                    })
                    .collect::<Res<Vec<i8>>>()?;
                Assignment::from_signs(&signs)
            };
            planted_instance(&pred, n, m, seed, &sigma)
        }
    }
    .map_err(e2s)?;
    let body = write_instance(&inst);
    match out {
        Some(path) => {
            std::fs::write(path, &body).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => {
            let mut stdout = io::stdout().lock();
            // Ignore a closed pipe, as for the run record.
            let _ = stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush());
        }
    }
    let text = vec![format!("generated n={n} m={m} predicate {pred}")];
    let outputs = json!({ "n": n, "m": m, "predicate": pred.to_string(), "planted": planted });
    let mut report = Report::new(text, outputs, true);
    report.seeds = vec![seed];
    report.record_to_stderr = out.is_none();
    Ok(report)
}
