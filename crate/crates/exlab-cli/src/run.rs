//! Dispatch from a validated config to the library oracles. Everything
//! here is deterministic for a fixed config and budget; parallelism only
//! changes wall-clock time, never a reported value.

use std::path::Path;

use exlab::bits::{format_hex, parse_hex};
use exlab::distkit::{Dist, FnTable, JointDist};
use exlab::extract::{
    adversarial_extract, weak_nme, CondenserContract, NmExtParams,
};
use exlab::gf2k::{mul_n, FieldSpec};
use exlab::nofsim::{
    cube_bias, gip_table, leakage_distance, missing_entropy_check, random_protocol, NofProtocol,
    TruthTable,
};
use exlab::ratio::{format_ratio, parse_ratio};
use exlab::verify::{
    condenser_profile, condenser_profile_sampled, strongness_check, weak_nme_distance,
    weak_nme_mc_check, Evaluator, Formula, SourceFamily, VerifyReport,
};
use exlab::{Budget, Error, Result};
use serde::de::DeserializeOwned;

use crate::config::{ExperimentConfig, FnSpec, ProtocolSource, ProtocolSpec};
use crate::report::{Output, RunReport};

fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
}

fn resolve_fn(spec: &FnSpec, parties: usize, input_bits: u32) -> Result<FnTable> {
    let total = input_bits
        .checked_mul(parties as u32)
        .ok_or_else(|| Error::config("input width overflows"))?;
    let table = match spec {
        FnSpec::Gip => gip_table(parties, input_bits)?,
        FnSpec::TableHex { hex } => TruthTable::from_hex(total, hex)?.to_fn_table(),
        FnSpec::File { path } => load_json::<FnTable>(path)?,
        FnSpec::Params { path } => {
            let params: NmExtParams = load_json(path)?;
            let ev = Evaluator::from_params(&params);
            let table = ev.to_fn_table()?;
            table
        }
    };
    if table.in_bits() != total {
        return Err(Error::config(format!(
            "function takes {} bits, {parties} parties of {input_bits} bits give {total}",
            table.in_bits()
        )));
    }
    Ok(table)
}

fn family_or_uniform(
    family: &Option<std::path::PathBuf>,
    n_sources: usize,
    input_bits: u32,
) -> Result<SourceFamily> {
    match family {
        Some(path) => {
            let f: SourceFamily = load_json(path)?;
            if f.n_sources() != n_sources || f.input_bits() != input_bits {
                return Err(Error::config(format!(
                    "family has {} sources of {} bits, run needs {n_sources} of {input_bits}",
                    f.n_sources(),
                    f.input_bits()
                )));
            }
            Ok(f)
        }
        None => SourceFamily::uniform(n_sources, input_bits),
    }
}

fn parse_inputs(inputs: &[String]) -> Result<Vec<u64>> {
    inputs.iter().map(|s| parse_hex(s)).collect()
}

fn value(label: &str, value: String) -> Output {
    Output::Value {
        label: label.to_string(),
        value,
    }
}

fn clamp_cost(c: u128) -> u64 {
    c.min(u64::MAX as u128) as u64
}

fn pair_cost(family: &SourceFamily) -> u64 {
    let t = family.tuple_cost().unwrap_or(u128::MAX);
    clamp_cost(t.saturating_mul(t))
}

pub fn run(config: &ExperimentConfig, budget: &Budget) -> Result<RunReport> {
    let mut outputs = Vec::new();
    let mut holds = true;
    let mut cost: u64 = 0;

    match config {
        ExperimentConfig::FieldMul { width, a, b } => {
            let a = parse_hex(a)?;
            let b = parse_hex(b)?;
            outputs.push(value("product", format_hex(mul_n(*width, a, b)?)));
            cost = 1;
        }
        ExperimentConfig::FieldTable { width } => {
            let spec = FieldSpec::get(*width)?;
            outputs.push(value("modulus", format!("{:#x}", spec.modulus)));
            outputs.push(value("modulus_polynomial", spec.modulus_polynomial()));
        }
        ExperimentConfig::DistSd { p, q } => {
            let p: Dist = load_json(p)?;
            let q: Dist = load_json(q)?;
            outputs.push(value(
                "statistical_distance",
                format_ratio(&p.statistical_distance(&q)?),
            ));
            cost = 1u64 << p.domain_bits();
        }
        ExperimentConfig::DistHmin { p } => {
            let p: Dist = load_json(p)?;
            let me = p.min_entropy();
            outputs.push(value("max_prob", format_ratio(&me.max_prob)));
            outputs.push(value("min_entropy_bits", me.bits.to_string()));
            cost = 1u64 << p.domain_bits();
        }
        ExperimentConfig::DistClose { p, k } => {
            let p: Dist = load_json(p)?;
            outputs.push(value(
                "closeness_to_min_entropy",
                format_ratio(&p.closeness_to_min_entropy(*k)?),
            ));
            cost = 1u64 << p.domain_bits();
        }
        ExperimentConfig::NofCube {
            f,
            parties,
            input_bits,
        } => {
            let table = resolve_fn(f, *parties, *input_bits)?;
            if table.out_bits() != 1 {
                return Err(Error::config(format!(
                    "cube bias needs a single-bit function, got {} output bits",
                    table.out_bits()
                )));
            }
            let tt = TruthTable::from_fn(table.in_bits(), |x| table.eval(x) == 1)?;
            let sources = vec![Dist::uniform(*input_bits); *parties];
            let bias = cube_bias(&tt, &sources, budget)?;
            outputs.push(value("cube_bias", format_ratio(&bias)));
            let per = 1u128 << (*input_bits * *parties as u32);
            cost = clamp_cost(per.saturating_mul(per));
        }
        ExperimentConfig::NofLeak {
            f,
            parties,
            input_bits,
            protocol,
            family,
        } => {
            let table = resolve_fn(f, *parties, *input_bits)?;
            let protocol = match protocol {
                ProtocolSpec::File { path } => load_json::<NofProtocol>(path)?,
                ProtocolSpec::Seeded { mu, seed, adaptive } => {
                    random_protocol(*parties, *input_bits, *mu, *adaptive, *seed)?
                }
            };
            let x: JointDist = match family {
                Some(_) => family_or_uniform(family, *parties, *input_bits)?.joint()?,
                None => JointDist::product(&vec![Dist::uniform(*input_bits); *parties])?,
            };
            let d = leakage_distance(&table, &protocol, &x, budget)?;
            outputs.push(value("leakage_distance", format_ratio(&d)));
            outputs.push(value(
                "protocol",
                serde_json::to_string(&protocol).map_err(|e| Error::config(e.to_string()))?,
            ));
            cost = clamp_cost(1u128 << (*input_bits * *parties as u32));
        }
        ExperimentConfig::NofMissingEntropy {
            f,
            parties,
            input_bits,
            mu,
            k,
        } => {
            let table = resolve_fn(f, *parties, *input_bits)?;
            let report = missing_entropy_check(&table, *parties, *input_bits, *k, *mu, budget)?;
            holds = report.holds;
            let per = 1u128 << (*input_bits * *parties as u32);
            cost = clamp_cost(
                report
                    .protocols_full
                    .saturating_add(report.protocols_test.saturating_mul(report.source_tuples))
                    .saturating_mul(per),
            );
            outputs.push(Output::MissingEntropy(report));
        }
        ExperimentConfig::ExtractNme { params, inputs } => {
            let params: NmExtParams = load_json(params)?;
            let inputs = parse_inputs(inputs)?;
            outputs.push(value("output", format_hex(weak_nme(&params, &inputs)?)));
            cost = 1;
        }
        ExperimentConfig::ExtractAdversarial { params, inputs } => {
            let params: NmExtParams = load_json(params)?;
            let inputs = parse_inputs(inputs)?;
            outputs.push(value(
                "output",
                format_hex(adversarial_extract(&params, &inputs)?),
            ));
            let n = inputs.len() as u64;
            cost = n * (n - 1) * (n - 2) / 6;
        }
        ExperimentConfig::VerifyNme {
            params,
            family,
            bound,
            mc_samples,
            seed,
        } => {
            let params: NmExtParams = load_json(params)?;
            let family = family_or_uniform(family, params.n_sources(), params.input_bits())?;
            let ev = Evaluator::from_params(&params);
            let d = weak_nme_distance(&ev, &family, budget)?;
            let formula = match bound {
                Some(s) => Formula::Explicit {
                    value: parse_ratio(s)?,
                },
                None => Formula::ConstantGap {
                    out_bits: params.out_bits(),
                },
            };
            let check =
                VerifyReport::from_formula("tampering distance", d, formula, pair_cost(&family));
            holds = check.holds;
            cost = check.cost;
            outputs.push(Output::Check(check));
            if let Some(samples) = mc_samples {
                let mc = weak_nme_mc_check(&ev, &family, *samples, *seed, budget)?;
                holds &= mc.within_three_sigma;
                cost = cost.saturating_add(*samples);
                outputs.push(Output::MonteCarlo(mc));
            }
        }
        ExperimentConfig::VerifyReduction {
            params,
            family,
            protocols,
        } => {
            let params: NmExtParams = load_json(params)?;
            let family = family_or_uniform(family, params.n_sources(), params.input_bits())?;
            let ev = Evaluator::from_params(&params);
            let protocols: Vec<NofProtocol> = match protocols {
                ProtocolSource::Enumerate { mu } => exlab::nofsim::enumerate_protocols(
                    params.n_sources(),
                    params.input_bits(),
                    *mu,
                    budget,
                )?
                .collect(),
                ProtocolSource::Seeded { mu, seeds, adaptive } => seeds
                    .iter()
                    .map(|&s| {
                        random_protocol(params.n_sources(), params.input_bits(), *mu, *adaptive, s)
                    })
                    .collect::<Result<Vec<_>>>()?,
                ProtocolSource::Files { paths } => paths
                    .iter()
                    .map(|p| load_json::<NofProtocol>(p))
                    .collect::<Result<Vec<_>>>()?,
            };
            let report = exlab::verify::reduction_bound_check(&ev, &family, &protocols, budget)?;
            holds = report.holds;
            cost = report
                .checks
                .iter()
                .fold(pair_cost(&family), |acc, c| acc.saturating_add(c.cost));
            outputs.push(Output::Reduction(report));
        }
        ExperimentConfig::VerifyCondenser {
            params,
            input_bits,
            cond_bits,
            k,
            l,
            eps,
            k_prime,
            sample_pairs,
            seed,
        } => {
            let cond: CondenserContract = match (params, input_bits, cond_bits) {
                (Some(p), None, None) => load_json::<NmExtParams>(p)?.condenser().clone(),
                (None, Some(n), Some(r)) => CondenserContract::ffm(*n, *r)?,
                _ => {
                    return Err(Error::config(
                        "give either a params file or input_bits plus cond_bits",
                    ))
                }
            };
            let profile = match sample_pairs {
                Some(pairs) => condenser_profile_sampled(&cond, *k, *l, *pairs, *seed, budget)?,
                None => condenser_profile(&cond, *k, *l, budget)?,
            };
            let eps_val = match eps {
                Some(s) => parse_ratio(s)?,
                None => profile.eps_max.clone(),
            };
            cost = profile.pairs.saturating_mul(1u64 << (2 * *k));
            if eps.is_some() {
                let check = VerifyReport::from_bound(
                    "condenser profile maximum",
                    profile.eps_max.clone(),
                    eps_val.clone(),
                    profile.pairs,
                );
                holds &= check.holds;
                outputs.push(Output::Check(check));
            }
            outputs.push(Output::Profile(profile));
            if let Some(kp) = k_prime {
                let strong = strongness_check(&cond, *k, *l, &eps_val, *kp, budget)?;
                holds &= strong.holds;
                cost = cost.saturating_add(strong.cost);
                outputs.push(Output::Check(strong));
            }
        }
        ExperimentConfig::VerifyAdversarial {
            params,
            n_total,
            good,
            bad_values,
            family,
        } => {
            let params: NmExtParams = load_json(params)?;
            let good: [usize; 3] = good
                .as_slice()
                .try_into()
                .map_err(|_| Error::config(format!("{} good indices (need 3)", good.len())))?;
            let bad = parse_inputs(bad_values)?;
            let family = family_or_uniform(family, 3, params.input_bits())?;
            let report = exlab::verify::adversarial_reduction_check(
                &params, *n_total, good, &bad, &family, budget,
            )?;
            holds = report.holds;
            cost = report
                .structural
                .cost
                .saturating_add(report.statistical.cost);
            outputs.push(Output::Adversarial(report));
        }
        ExperimentConfig::FixturesRegen { path } => {
            let fresh = exlab::fixtures::regenerate();
            let mismatches = match exlab::fixtures::load(path) {
                Ok(old) => exlab::fixtures::diff(&old, &fresh)
                    .iter()
                    .map(|m| m.to_string())
                    .collect(),
                Err(_) => Vec::new(),
            };
            exlab::fixtures::save(path, &fresh)?;
            outputs.push(Output::Fixtures {
                entries: fresh.entries.len(),
                mismatches,
            });
            cost = fresh.entries.len() as u64;
        }
        ExperimentConfig::FixturesCheck { path } => {
            let committed = exlab::fixtures::load(path)?;
            let fresh = exlab::fixtures::regenerate();
            let mismatches: Vec<String> = exlab::fixtures::diff(&committed, &fresh)
                .iter()
                .map(|m| m.to_string())
                .collect();
            holds = mismatches.is_empty();
            outputs.push(Output::Fixtures {
                entries: fresh.entries.len(),
                mismatches,
            });
            cost = fresh.entries.len() as u64;
        }
    }

    Ok(RunReport::new(config.clone(), outputs, holds, cost))
}
