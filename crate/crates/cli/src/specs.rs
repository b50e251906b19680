//! Parsers for the short group, subgroup and representation specs used on the
//! command line and in configs.
//!
//! Groups: `symmetric:n`, `alternating:n`, `cyclic:n`, `trivial:n`.
//! Subgroups of `G`: `trivial`, `whole`, `alternating` (even elements of `G`),
//! `stabilizer:i`, `generated:(0 1)(2 3);(0 2)`.
//! Representations: `natural`, `trivial`, `trivial:k`, `regular`, `cosets:<subgroup>`.

use std::sync::Arc;

use equivcheck::groups::{self, PermGroup, Permutation};
use equivcheck::representations::PermRep;

use crate::CliError;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_size(s: &str, what: &str) -> Result<usize, CliError> {
    s.trim().parse().map_err(|_| config_err(format!("bad {what} {s:?}")))
}

pub fn parse_group(spec: &str) -> Result<PermGroup, CliError> {
    let (kind, arg) = spec.split_once(':').ok_or_else(|| config_err(format!("group spec {spec:?} needs the form kind:n")))?;
    let n = parse_size(arg, "group degree")?;
    if n == 0 {
        return Err(config_err("group degree must be positive"));
    }
    let group = match kind {
        "symmetric" => groups::symmetric_group(n),
        "alternating" => groups::alternating_group(n),
        "cyclic" => groups::cyclic_group(n),
        "trivial" => Ok(groups::trivial_group(n)),
        other => return Err(config_err(format!("unknown group kind {other:?}"))),
    };
    group.map_err(|e| config_err(format!("group {spec:?}: {e}")))
}

/// Parses cycle notation such as `(0 1)(2 3)` into a permutation of `n` points.
pub fn parse_cycles(n: usize, text: &str) -> Result<Permutation, CliError> {
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let body = rest.strip_prefix('(').ok_or_else(|| config_err(format!("bad cycle notation {text:?}")))?;
        let close = body.find(')').ok_or_else(|| config_err(format!("unclosed cycle in {text:?}")))?;
        let points = body[..close]
            .split(|c: char| c == ' ' || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| parse_size(s, "cycle point"))
            .collect::<Result<Vec<_>, _>>()?;
        cycles.push(points);
        rest = body[close + 1..].trim_start();
    }
    let refs: Vec<&[usize]> = cycles.iter().map(Vec::as_slice).collect();
    Permutation::from_cycles(n, &refs).map_err(|e| config_err(format!("{text:?}: {e}")))
}

pub fn parse_subgroup(group: &PermGroup, spec: &str) -> Result<PermGroup, CliError> {
    let n = group.base_size();
    let (kind, arg) = spec.split_once(':').map_or((spec, ""), |(k, a)| (k, a));
    match kind {
        "trivial" => Ok(groups::trivial_group(n)),
        "whole" => Ok(group.clone()),
        "alternating" => {
            let evens = group.elements().iter().filter(|g| g.is_even()).cloned().collect();
            Ok(PermGroup::from_elements(n, evens)?)
        }
        "stabilizer" => Ok(group.stabilizer(parse_size(arg, "point")?)?),
        "generated" => {
            let gens = arg.split(';').map(|c| parse_cycles(n, c)).collect::<Result<Vec<_>, _>>()?;
            let h = groups::group_closure(n, &gens, group.order())?;
            h.validate_subgroup_of(group)?;
            Ok(h)
        }
        other => Err(config_err(format!("unknown subgroup spec {other:?}"))),
    }
}

pub fn parse_rep(group: &Arc<PermGroup>, spec: &str) -> Result<PermRep, CliError> {
    let (kind, arg) = spec.split_once(':').map_or((spec, ""), |(k, a)| (k, a));
    match kind {
        "natural" => Ok(PermRep::natural(group.clone())),
        "regular" => Ok(PermRep::regular(group.clone())),
        "trivial" => {
            let dim = if arg.is_empty() { 1 } else { parse_size(arg, "dimension")? };
            Ok(PermRep::trivial(group.clone(), dim))
        }
        "cosets" => {
            let h = parse_subgroup(group, arg)?;
            Ok(PermRep::cosets(group.clone(), &h)?)
        }
        other => Err(config_err(format!("unknown representation spec {other:?}"))),
    }
}
