use std::collections::BTreeMap;
use std::fmt::Write as _;

use ravenlab_core::acceptance::{run_criterion, CriterionResult, CRITERIA};
use ravenlab_core::cosmology::{
    assumption_check, mixture_from_file, mixture_probability, proposition1_check, size_posterior, uniform_size_prior,
    MixtureModel, BETA_CAP,
};
use ravenlab_core::measures::{parse_measure_spec, Measure};
use ravenlab_core::model::{exact_expansion, permute_proposition, CategorySet, Permutation, Proposition, PREDICATE_NAMES};
use ravenlab_core::prop_lang;
use ravenlab_core::rational::{self, parse_rational, Rational};
use ravenlab_core::rules::{
    check_nc, check_pj, check_ra, example7_identity, exact_and_approx, setting2_checks, table1_matrix,
    theorem1_sweep, theorem2_premise_check, theorem2_sweep, xi_factors, GuardedResult, PjMode, Relation,
};
use ravenlab_core::search::{
    bisect_threshold, default_bisect_width, grid_sweep, random_trials, records_to_csv, GridPoint, Param, Predicate,
    SweepSpec, TrialConfig,
};
use serde_json::json;

use crate::{Command, Failure, Format, Global, MixtureArgs, Report, Rule};

fn fail(e: impl std::fmt::Display) -> Failure {
    Failure(e.to_string())
}

fn pretty(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

fn universe(g: &Global) -> Result<usize, Failure> {
    g.n.ok_or_else(|| Failure("--n is required for this command".into()))
}

fn measure(g: &Global) -> Result<Measure, Failure> {
    let n = universe(g)?;
    parse_measure_spec(&g.measure)
        .and_then(|spec| spec.build(n, g.seed))
        .map_err(fail)
}

/// Parses with a caret under the offending character.
fn proposition(text: &str, n: usize, what: &str) -> Result<Proposition, Failure> {
    prop_lang::parse(text, n).map_err(|e| {
        Failure(format!(
            "cannot parse {what} at position {}: {}\n  {text}\n  {}^",
            e.position,
            e.message,
            " ".repeat(e.position)
        ))
    })
}

fn background(text: &Option<String>, n: usize) -> Result<Proposition, Failure> {
    match text {
        Some(t) => proposition(t, n, "--given"),
        None => Ok(Proposition::top()),
    }
}

fn rational_arg(text: &str, what: &str) -> Result<Rational, Failure> {
    parse_rational(text).map_err(|e| Failure(format!("{what}: {e}")))
}

fn predicate_set(name: &str) -> Result<CategorySet, Failure> {
    PREDICATE_NAMES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| {
            let names: Vec<&str> = PREDICATE_NAMES.iter().map(|(n, _)| *n).collect();
            Failure(format!("unknown predicate {name:?}; expected one of {}", names.join(", ")))
        })
}

fn format_or(g: &Global, default: Format, allowed: &[Format], command: &str) -> Result<Format, Failure> {
    let f = g.format.unwrap_or(default);
    if !allowed.contains(&f) {
        return Err(Failure(format!("{command} does not support --format {f:?}").to_lowercase()));
    }
    Ok(f)
}

fn ok(body: String) -> Result<Report, Failure> {
    Ok(Report { body, violation: false })
}

pub fn run(g: &Global, command: &Command) -> Result<Report, Failure> {
    match command {
        Command::Eval {
            prop,
            given,
            permute,
            expand,
        } => eval(g, prop, given, permute, *expand),
        Command::Check {
            rule,
            given,
            a,
            b,
            psi,
            strong,
            k,
            evidence,
            mixture,
        } => check(g, *rule, given, *a, *b, psi, *strong, *k, evidence, mixture),
        Command::Table1 { k, a } => table1(g, *k, *a),
        Command::Sweep { config, spec } => {
            let text = match (config, spec) {
                (Some(path), _) => std::fs::read_to_string(path)
                    .map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))?,
                (None, Some(s)) => s.clone(),
                (None, None) => return Err(Failure("sweep needs --config <file> or --spec <json>".into())),
            };
            sweep(g, &text)
        }
        Command::Bisect {
            param,
            lo,
            hi,
            predicate,
            given,
            a,
            width,
            claim,
        } => bisect(g, param, lo, hi, predicate, given, *a, width, claim),
        Command::Mixture {
            prop,
            given,
            evidence,
            mixture,
        } => mixture_cmd(g, prop, given, evidence, mixture),
        Command::Selftest {
            criteria,
            trials,
            trial_n_max,
            plant_broken,
        } => selftest(g, criteria, *trials, *trial_n_max, *plant_broken),
    }
}

fn expand_exact(p: &Proposition, n: usize) -> Result<Proposition, Failure> {
    Ok(match p {
        Proposition::Exact(k) => exact_expansion(*k, n).map_err(fail)?,
        Proposition::Not(inner) => Proposition::Not(Box::new(expand_exact(inner, n)?)),
        Proposition::And(items) => {
            Proposition::And(items.iter().map(|i| expand_exact(i, n)).collect::<Result<_, _>>()?)
        }
        Proposition::Or(items) => Proposition::Or(items.iter().map(|i| expand_exact(i, n)).collect::<Result<_, _>>()?),
        Proposition::Implies(l, r) => {
            Proposition::Implies(Box::new(expand_exact(l, n)?), Box::new(expand_exact(r, n)?))
        }
        other => other.clone(),
    })
}

fn conditional(m: &Measure, a: &Proposition, b: &Proposition) -> Result<Rational, Failure> {
    let n = m.universe_size();
    let b_event = b.event(n).map_err(fail)?;
    m.conditional(&a.event(n).map_err(fail)?, &b_event)
        .map_err(|e| Failure(format!("pr({}) = 0, conditional undefined ({e})", prop_lang::format(b))))
}

fn eval(g: &Global, prop: &str, given: &Option<String>, permute: &Option<String>, expand: bool) -> Result<Report, Failure> {
    let format = format_or(g, Format::Text, &[Format::Text, Format::Json, Format::Csv], "eval")?;
    let m = measure(g)?;
    let n = m.universe_size();
    let a = proposition(prop, n, "proposition")?;
    let b = background(given, n)?;
    let p = conditional(&m, &a, &b)?;
    let permuted = match permute {
        None => None,
        Some(text) => {
            let mapping = text
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| Failure(format!("--permute expects comma-separated objects, got {text:?}")))?;
            if mapping.len() != n {
                return Err(Failure(format!("--permute needs {n} images, got {}", mapping.len())));
            }
            let pi = Permutation::new(mapping).map_err(fail)?;
            let a_pi = permute_proposition(&a, &pi).map_err(fail)?;
            let b_pi = permute_proposition(&b, &pi).map_err(fail)?;
            let p_pi = conditional(&m, &a_pi, &b_pi)?;
            Some((pi, a_pi, b_pi, p_pi))
        }
    };
    let expanded = if expand { Some(expand_exact(&a, n)?) } else { None };
    let body = match format {
        Format::Text => {
            let mut s = exact_and_approx(&p);
            if let Some((pi, a_pi, b_pi, p_pi)) = &permuted {
                let cond = if b.is_top() { String::new() } else { format!(" | {}", prop_lang::format(b_pi)) };
                write!(s, "\npermuted by {pi}: {}{cond} -> {}", prop_lang::format(a_pi), exact_and_approx(p_pi)).unwrap();
            }
            if let Some(e) = &expanded {
                write!(s, "\nexpanded: {}", prop_lang::format(e)).unwrap();
            }
            s
        }
        Format::Json => {
            let mut v = json!({
                "proposition": prop_lang::format(&a),
                "given": prop_lang::format(&b),
                "probability": rational::to_fraction_string(&p),
                "approx": rational::decimal_string(&p),
            });
            if let Some((pi, a_pi, b_pi, p_pi)) = &permuted {
                v["permutation"] = json!(pi.mapping());
                v["permuted"] = json!({
                    "proposition": prop_lang::format(a_pi),
                    "given": prop_lang::format(b_pi),
                    "probability": rational::to_fraction_string(p_pi),
                });
            }
            if let Some(e) = &expanded {
                v["expanded"] = json!(prop_lang::format(e));
            }
            pretty(&v)
        }
        Format::Csv => format!("probability,approx\n{},{}", rational::to_fraction_string(&p), rational::decimal_string(&p)),
    };
    ok(body)
}

fn guarded_text(results: &[&GuardedResult]) -> String {
    results
        .iter()
        .map(|r| {
            let mut s = r.to_string();
            if r.is_violation() {
                s.push_str("\nIMPLICATION VIOLATED");
            }
            s
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn guarded_report(format: Format, results: &[&GuardedResult]) -> Result<Report, Failure> {
    let body = match format {
        Format::Json if results.len() == 1 => pretty(results[0]),
        Format::Json => pretty(&results),
        _ => guarded_text(results),
    };
    Ok(Report {
        body,
        violation: results.iter().any(|r| r.is_violation()),
    })
}

pub fn build_mixture(g: &Global, args: &MixtureArgs) -> Result<MixtureModel, Failure> {
    if let Some(path) = &args.mixture {
        if args.alpha.is_some() || args.beta.is_some() || args.q.is_some() {
            return Err(Failure("--mixture cannot be combined with --alpha, --beta or --q".into()));
        }
        return mixture_from_file(path, g.seed).map_err(fail);
    }
    let (Some(alpha), Some(beta)) = (args.alpha, args.beta) else {
        return Err(Failure("a mixture needs --mixture <file> or both --alpha and --beta".into()));
    };
    if alpha == 0 || alpha > beta || beta > BETA_CAP {
        return Err(Failure(format!("need 1 <= alpha <= beta <= {BETA_CAP}, got alpha={alpha}, beta={beta}")));
    }
    let q = match &args.q {
        None => uniform_size_prior(alpha, beta),
        Some(text) => {
            let mut q = BTreeMap::new();
            for item in text.split(',') {
                let (size, weight) = item
                    .split_once('=')
                    .ok_or_else(|| Failure(format!("--q entries look like 2=1/2, got {item:?}")))?;
                let size: usize = size
                    .trim()
                    .parse()
                    .map_err(|_| Failure(format!("--q size {size:?} is not an integer")))?;
                q.insert(size, rational_arg(weight.trim(), "--q")?);
            }
            q
        }
    };
    let spec = parse_measure_spec(&g.measure).map_err(fail)?;
    MixtureModel::from_family(alpha, beta, q, |size| spec.build(size, g.seed.wrapping_add(size as u64)))
        .map_err(fail)
}

#[allow(clippy::too_many_arguments)]
fn check(
    g: &Global,
    rule: Rule,
    given: &Option<String>,
    a: usize,
    b: usize,
    psi: &str,
    strong: bool,
    k: Option<usize>,
    evidence: &str,
    mixture: &MixtureArgs,
) -> Result<Report, Failure> {
    let format = format_or(g, Format::Text, &[Format::Text, Format::Json], "check")?;
    if rule == Rule::Prop1 {
        let mix = build_mixture(g, mixture)?;
        let n = mix.alpha();
        let e = proposition(evidence, n, "--evidence")?;
        let d = background(given, n)?;
        let result = proposition1_check(&mix, &e, &d).map_err(fail)?;
        let assumption = assumption_check(&mix, &e, &d).map_err(fail)?;
        let body = match format {
            Format::Json => pretty(&json!({ "result": result, "assumption": assumption })),
            _ => format!(
                "{}\nsize posterior given D: {:?}\nsize posterior given E.D: {:?}",
                guarded_text(&[&result]),
                assumption.given_d,
                assumption.given_ed
            ),
        };
        return Ok(Report {
            body,
            violation: result.is_violation(),
        });
    }
    let m = measure(g)?;
    let n = m.universe_size();
    let d = background(given, n)?;
    let need_k = || k.ok_or_else(|| Failure("--k is required for thm4/thm5".into()));
    match rule {
        Rule::Nc => {
            let v = check_nc(&m, &d, a).map_err(fail)?;
            let body = match format {
                Format::Json => pretty(&v),
                _ => format!("NC(D={}, a={a}): {v}", prop_lang::format(&d)),
            };
            ok(body)
        }
        Rule::Pj | Rule::Ra => {
            let r = if rule == Rule::Pj {
                let mode = if strong { PjMode::Strong } else { PjMode::Weak };
                check_pj(&m, predicate_set(psi)?, a, b, &d, mode)
            } else {
                check_ra(&m, a, b, &d)
            }
            .map_err(fail)?;
            // A measure failing PJ or RA is a finding, not a broken implication.
            let body = match format {
                Format::Json => pretty(&r),
                _ => r.to_string(),
            };
            ok(body)
        }
        Rule::Xi => {
            let xi = xi_factors(&m, &d, a).map_err(fail)?;
            let v = check_nc(&m, &d, a).map_err(fail)?;
            let predicted = xi.product > Rational::from_integer(1.into());
            let agrees = predicted == (v.relation == Relation::Confirms);
            let body = match format {
                Format::Json => pretty(&json!({ "xi": xi, "nc": v, "agrees": agrees })),
                _ => format!(
                    "xi1 = {}\nxi2 = {}\nproduct = {}\nNC: {v}\nxi1*xi2 > 1 {} NC CONFIRMS",
                    exact_and_approx(&xi.xi1),
                    exact_and_approx(&xi.xi2),
                    exact_and_approx(&xi.product),
                    if agrees { "agrees with" } else { "CONTRADICTS" }
                ),
            };
            Ok(Report { body, violation: !agrees })
        }
        Rule::Thm1 => guarded_report(format, &[&theorem1_sweep(&m).map_err(fail)?]),
        Rule::Thm2 => {
            let r = match given {
                Some(_) => theorem2_premise_check(&m, &d, a),
                None => theorem2_sweep(&m),
            }
            .map_err(fail)?;
            guarded_report(format, &[&r])
        }
        Rule::Thm4 | Rule::Thm5 => {
            let report = setting2_checks(&m, need_k()?, a).map_err(fail)?;
            if rule == Rule::Thm4 {
                let mut out = guarded_report(format, &[&report.theorem4])?;
                if format == Format::Text {
                    if let Some(res) = &report.residuals {
                        for (label, value) in res.entries() {
                            let shown = value.as_ref().map(exact_and_approx).unwrap_or_else(|| "undefined".into());
                            write!(out.body, "\nresidual {label}: {shown}").unwrap();
                        }
                    }
                }
                Ok(out)
            } else {
                guarded_report(
                    format,
                    &[&report.theorem3_pj, &report.theorem3_ra, &report.theorem5_pj, &report.theorem5_ra],
                )
            }
        }
        Rule::Ex7 => {
            let r = example7_identity(&m).map_err(fail)?;
            let show = |x: &Option<Rational>| x.as_ref().map(exact_and_approx).unwrap_or_else(|| "undefined".into());
            let body = match format {
                Format::Json => pretty(&r),
                _ => format!(
                    "pr(Exact(2).F_3.G_3 | H) = {}\n2 * pr(F_1.F_2.nF_3.G_2 | H) = {}\njoint: {} vs {}\nidentity {}",
                    show(&r.conditional_lhs),
                    show(&r.conditional_rhs),
                    exact_and_approx(&r.joint_lhs),
                    exact_and_approx(&r.joint_rhs),
                    if r.holds { "holds" } else { "fails" }
                ),
            };
            // The identity rests on exchangeability; only then is a failure a violation.
            Ok(Report {
                body,
                violation: !r.holds && m.is_exchangeable(),
            })
        }
        Rule::Prop1 => unreachable!("handled above"),
    }
}

fn table1(g: &Global, k: usize, a: usize) -> Result<Report, Failure> {
    let format = format_or(g, Format::Text, &[Format::Text, Format::Json], "table1")?;
    let m = measure(g)?;
    let t = table1_matrix(&m, k, a).map_err(fail)?;
    let body = match format {
        Format::Json => pretty(&t),
        _ => {
            let mut s = t.to_string();
            write!(
                s,
                "PJ pattern {}",
                if t.pattern_matches() { "reproduced" } else { "not reproduced" }
            )
            .unwrap();
            s
        }
    };
    Ok(Report {
        body,
        violation: t.violations() > 0,
    })
}

fn sweep(g: &Global, text: &str) -> Result<Report, Failure> {
    let format = format_or(g, Format::Csv, &[Format::Text, Format::Json, Format::Csv], "sweep")?;
    let spec = SweepSpec::from_json(text).map_err(fail)?;
    let records = grid_sweep(&spec).map_err(fail)?;
    let violation = records
        .iter()
        .any(|r| r.rows.iter().any(|row| row.verdict == "VIOLATION"));
    let body = match format {
        Format::Json => pretty(&records),
        _ => records_to_csv(&records).map_err(fail)?,
    };
    Ok(Report { body, violation })
}

#[allow(clippy::too_many_arguments)]
fn bisect(
    g: &Global,
    param: &str,
    lo: &str,
    hi: &str,
    predicate: &str,
    given: &Option<String>,
    a: usize,
    width: &Option<String>,
    claim: &Option<String>,
) -> Result<Report, Failure> {
    let format = format_or(g, Format::Text, &[Format::Text, Format::Json, Format::Csv], "bisect")?;
    let n = universe(g)?;
    let spec = parse_measure_spec(&g.measure).map_err(fail)?;
    let base = GridPoint::from_measure_spec(n, &spec).map_err(fail)?;
    let param: Param = param.parse().map_err(fail)?;
    let lo = rational_arg(lo, "--lo")?;
    let hi = rational_arg(hi, "--hi")?;
    let width = match width {
        Some(w) => rational_arg(w, "--width")?,
        None => default_bisect_width(),
    };
    let d = background(given, n)?;
    let predicate = match predicate {
        "nc" => Predicate::NcConfirms { background: d, a },
        "thm1" => Predicate::Theorem1Premise,
        "thm2-i" => Predicate::Theorem2PremiseI,
        "thm2-ii" => Predicate::Theorem2PremiseII { background: d, a },
        other => match other.strip_prefix("below:") {
            Some(t) => Predicate::Below(rational_arg(t, "--predicate below")?),
            None => {
                return Err(Failure(format!(
                    "unknown predicate {other:?}; expected nc, thm1, thm2-i, thm2-ii or below:<x>"
                )))
            }
        },
    };
    let bracket = bisect_threshold(&base, param, lo, hi, &predicate, &width).map_err(fail)?;
    let claim = claim.as_ref().map(|c| rational_arg(c, "--claim")).transpose()?;
    let body = match format {
        Format::Json => {
            let mut v = json!({ "bracket": bracket, "midpoint": rational::decimal_string(&bracket.midpoint()) });
            if let Some(c) = &claim {
                v["claim"] = json!(rational::to_fraction_string(c));
                v["claim_inside"] = json!(bracket.contains(c));
                v["deviation"] = json!(rational::decimal_string(&bracket.deviation_from(c)));
            }
            pretty(&v)
        }
        Format::Csv => format!(
            "param,lo,hi,lo_approx,hi_approx,value_at_lo,value_at_hi,evaluations\n{:?},{},{},{},{},{},{},{}",
            bracket.param,
            rational::to_fraction_string(&bracket.lo),
            rational::to_fraction_string(&bracket.hi),
            rational::decimal_string(&bracket.lo),
            rational::decimal_string(&bracket.hi),
            bracket.value_at_lo,
            bracket.value_at_hi,
            bracket.evaluations
        ),
        Format::Text => {
            let mut s = bracket.to_string();
            if let Some(c) = &claim {
                write!(
                    s,
                    "\nclaimed threshold {} is {} the bracket; deviation from midpoint ~{}",
                    rational::decimal_string(c),
                    if bracket.contains(c) { "inside" } else { "outside" },
                    rational::decimal_string(&bracket.deviation_from(c))
                )
                .unwrap();
            }
            s
        }
    };
    ok(body)
}

fn mixture_cmd(
    g: &Global,
    prop: &str,
    given: &Option<String>,
    evidence: &Option<String>,
    args: &MixtureArgs,
) -> Result<Report, Failure> {
    let format = format_or(g, Format::Text, &[Format::Text, Format::Json], "mixture")?;
    let mix = build_mixture(g, args)?;
    let n = mix.alpha();
    let rho = proposition(prop, n, "proposition")?;
    let d = background(given, n)?;
    let joint = mixture_probability(&mix, &rho.clone().and(d.clone())).map_err(fail)?;
    let pd = mixture_probability(&mix, &d).map_err(fail)?;
    if pd == Rational::from_integer(0.into()) {
        return Err(Failure(format!("pr({}) = 0 under the mixture", prop_lang::format(&d))));
    }
    let p = joint / pd;
    let posterior = size_posterior(&mix, &rho).map_err(fail)?;
    let assumption = evidence
        .as_ref()
        .map(|e| {
            let e = proposition(e, n, "--evidence")?;
            assumption_check(&mix, &e, &d).map_err(fail)
        })
        .transpose()?;
    let posterior_text: BTreeMap<usize, String> =
        posterior.iter().map(|(s, r)| (*s, rational::to_fraction_string(r))).collect();
    let body = match format {
        Format::Json => pretty(&json!({
            "alpha": mix.alpha(),
            "beta": mix.beta(),
            "probability": rational::to_fraction_string(&p),
            "size_posterior": posterior_text,
            "assumption": assumption,
        })),
        _ => {
            let mut s = format!(
                "mixture over sizes {}..={}\npr({}{}) = {}\nsize posterior given {}:",
                mix.alpha(),
                mix.beta(),
                prop_lang::format(&rho),
                if d.is_top() { String::new() } else { format!(" | {}", prop_lang::format(&d)) },
                exact_and_approx(&p),
                prop_lang::format(&rho)
            );
            for (size, r) in &posterior {
                write!(s, "\n  {size}: {}", exact_and_approx(r)).unwrap();
            }
            if let Some(a) = &assumption {
                write!(
                    s,
                    "\nsize posterior unaffected by evidence: {} (max deviation {})",
                    a.holds,
                    exact_and_approx(&a.max_deviation)
                )
                .unwrap();
            }
            s
        }
    };
    ok(body)
}

fn selftest(
    g: &Global,
    criteria: &[u8],
    trials: Option<usize>,
    trial_n_max: usize,
    plant_broken: bool,
) -> Result<Report, Failure> {
    let format = format_or(g, Format::Text, &[Format::Text, Format::Json], "selftest")?;
    if let Some(bad) = criteria.iter().find(|id| !CRITERIA.iter().any(|(c, _)| c == *id)) {
        return Err(Failure(format!("no criterion {bad}; criteria are 1..={}", CRITERIA.len())));
    }
    let ids: Vec<u8> = if criteria.is_empty() {
        CRITERIA.iter().map(|(id, _)| *id).collect()
    } else {
        criteria.to_vec()
    };
    let results: Vec<CriterionResult> = ids.into_iter().map(run_criterion).collect();
    let trial_report = trials
        .map(|t| {
            let mut config = TrialConfig::new(t, g.seed, trial_n_max);
            config.plant_broken = plant_broken;
            random_trials(&config).map_err(fail)
        })
        .transpose()?;
    let failed = results.iter().filter(|r| !r.passed).count();
    let violations = trial_report.as_ref().map_or(0, |r| r.violation_count());
    let body = match format {
        Format::Json => pretty(&json!({ "criteria": results, "trials": trial_report })),
        _ => {
            let mut s: Vec<String> = results.iter().map(ToString::to_string).collect();
            s.push(format!("{} of {} criteria passed", results.len() - failed, results.len()));
            if let Some(r) = &trial_report {
                s.push(format!(
                    "random trials: {} trials (seed {}), {} checks, {} violations, {} conjecture counterexamples",
                    r.trials,
                    r.seed,
                    r.checks.values().sum::<usize>(),
                    r.violation_count(),
                    r.counterexamples.len()
                ));
                for v in r.violations.iter().take(5) {
                    s.push(format!("  violation {} (trial {}, seed {}, N={}): {}", v.property, v.trial, v.seed, v.n, v.witness));
                }
            }
            s.join("\n")
        }
    };
    Ok(Report {
        body,
        violation: failed > 0 || violations > 0,
    })
}
