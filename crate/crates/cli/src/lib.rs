//! IO, file formats, experiment harness, and table reproduction for the
//! online maximum independent set toolkit. The algorithmic kernels live in
//! `boxmis-core`; this crate adds everything that needs the standard
//! library: files, threads, timing, and the command line.

pub mod digest;
pub mod formats;
pub mod harness;
pub mod report;

use anyhow::{anyhow, bail, Result};
use boxmis_core::policies::PolicySpec;
use boxmis_core::rat::parse_rat;

/// Parses a policy argument: `greedy`, `greedyp:<p>`, or
/// `classified:<sigma>:<k>` (values rational or decimal).
pub fn parse_policy(s: &str) -> Result<PolicySpec> {
    if s == "greedy" {
        return Ok(PolicySpec::NaiveGreedy);
    }
    if let Some(p) = s.strip_prefix("greedyp:") {
        let p = parse_rat(p).ok_or_else(|| anyhow!("bad probability {p:?}"))?;
        let spec = PolicySpec::GreedyP(p);
        spec.validate().map_err(|e| anyhow!("{e}"))?;
        return Ok(spec);
    }
    if let Some(rest) = s.strip_prefix("classified:") {
        let (sigma, k) = rest
            .rsplit_once(':')
            .ok_or_else(|| anyhow!("classified policy needs sigma and k"))?;
        let sigma = parse_rat(sigma).ok_or_else(|| anyhow!("bad sigma {sigma:?}"))?;
        let k: u32 = k.parse().map_err(|_| anyhow!("bad class count {k:?}"))?;
        let spec = PolicySpec::ClassifiedGreedy { sigma, k };
        spec.validate().map_err(|e| anyhow!("{e}"))?;
        return Ok(spec);
    }
    bail!("unknown policy {s:?} (expected greedy, greedyp:<p>, or classified:<sigma>:<k>)")
}

/// Worker count resolution: explicit flag, then BOXMIS_WORKERS, then any
/// `workers=` line of the optional config file, then 1.
pub fn resolve_workers(flag: Option<usize>, config: Option<&str>) -> usize {
    if let Some(w) = flag {
        return w.max(1);
    }
    if let Ok(env) = std::env::var("BOXMIS_WORKERS") {
        if let Ok(w) = env.trim().parse::<usize>() {
            return w.max(1);
        }
    }
    if let Some(text) = config {
        for line in text.lines() {
            if let Some(v) = line.trim().strip_prefix("workers=") {
                if let Ok(w) = v.trim().parse::<usize>() {
                    return w.max(1);
                }
            }
        }
    }
    1
}

#[cfg(test)]
mod tests {
    use super::*;
    use boxmis_core::rat::rat;

    #[test]
    fn policy_parsing() {
        assert_eq!(parse_policy("greedy").unwrap(), PolicySpec::NaiveGreedy);
        assert_eq!(parse_policy("greedyp:0.56").unwrap(), PolicySpec::GreedyP(rat(14, 25)));
        assert_eq!(
            parse_policy("classified:5/2:3").unwrap(),
            PolicySpec::ClassifiedGreedy { sigma: rat(5, 2), k: 3 }
        );
        assert!(parse_policy("greedyp:1.5").is_err());
        assert!(parse_policy("mystery").is_err());
    }

    #[test]
    fn worker_resolution() {
        assert_eq!(resolve_workers(Some(4), None), 4);
        assert_eq!(resolve_workers(None, Some("format=csv\nworkers=3\n")), 3);
    }
}
