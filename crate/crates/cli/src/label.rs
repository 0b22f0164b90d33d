//! Method labels `WFN/BASIS(N_e,N_q)[key=value,...]-REFWFN`, e.g.
//! `SPA+GSD/MRA(2,4)[it=3]` or `FCI/MRA(4,8)[opt=4,it=2]-SPA+GSD`.

use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// MP2 pair natural orbitals, unrefined
    Pno,
    /// refined orbitals
    Mra,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodLabel {
    pub wfn: String,
    pub basis: BasisKind,
    pub n_elec: usize,
    pub n_qubits: usize,
    pub opt: Option<usize>,
    pub it: Option<usize>,
    /// wavefunction used for refinement when it differs from `wfn`
    pub refined_with: Option<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid method label `{label}`: {reason}")]
pub struct LabelError {
    pub label: String,
    pub reason: String,
}

impl fmt::Display for MethodLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let basis = match self.basis {
            BasisKind::Pno => "PNO",
            BasisKind::Mra => "MRA",
        };
        write!(f, "{}/{}({},{})", self.wfn, basis, self.n_elec, self.n_qubits)?;
        let mut opts = Vec::new();
        if let Some(o) = self.opt {
            opts.push(format!("opt={o}"));
        }
        if let Some(i) = self.it {
            opts.push(format!("it={i}"));
        }
        if !opts.is_empty() {
            write!(f, "[{}]", opts.join(","))?;
        }
        if let Some(r) = &self.refined_with {
            write!(f, "-{r}")?;
        }
        Ok(())
    }
}

fn valid_wfn(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '+' || c == '-' || c == '_')
}

impl FromStr for MethodLabel {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fail = |reason: &str| LabelError {
            label: s.to_string(),
            reason: reason.to_string(),
        };
        let (wfn, rest) = s.split_once('/').ok_or_else(|| fail("missing `/`"))?;
        if !valid_wfn(wfn) {
            return Err(fail("invalid wavefunction name"));
        }
        let open = rest.find('(').ok_or_else(|| fail("missing `(N_e,N_q)`"))?;
        let basis = match &rest[..open] {
            "PNO" => BasisKind::Pno,
            "MRA" => BasisKind::Mra,
            other => return Err(fail(&format!("unknown basis `{other}`"))),
        };
        let close = rest.find(')').ok_or_else(|| fail("unclosed `(`"))?;
        let (ne, nq) = rest[open + 1..close]
            .split_once(',')
            .ok_or_else(|| fail("expected `(N_e,N_q)`"))?;
        let n_elec = ne.trim().parse().map_err(|_| fail("bad electron count"))?;
        let n_qubits = nq.trim().parse().map_err(|_| fail("bad qubit count"))?;
        let mut tail = &rest[close + 1..];
        let mut label = MethodLabel {
            wfn: wfn.to_string(),
            basis,
            n_elec,
            n_qubits,
            opt: None,
            it: None,
            refined_with: None,
        };
        if let Some(t) = tail.strip_prefix('[') {
            let end = t.find(']').ok_or_else(|| fail("unclosed `[`"))?;
            for item in t[..end].split(',') {
                let (k, v) = item.split_once('=').ok_or_else(|| fail("options must be `key=value`"))?;
                match k.trim() {
                    "opt" => label.opt = Some(v.trim().parse().map_err(|_| fail("bad opt value"))?),
                    "it" => label.it = Some(v.trim().parse().map_err(|_| fail("bad it value"))?),
                    "wfn" => label.refined_with = Some(v.trim().to_string()),
                    other => return Err(fail(&format!("unknown option `{other}`"))),
                }
            }
            tail = &t[end + 1..];
        }
        if let Some(r) = tail.strip_prefix('-') {
            if !valid_wfn(r) {
                return Err(fail("invalid refinement wavefunction"));
            }
            label.refined_with = Some(r.to_string());
        } else if !tail.is_empty() {
            return Err(fail("trailing characters"));
        }
        if label.basis == BasisKind::Pno && (label.opt.is_some() || label.it.is_some() || label.refined_with.is_some()) {
            return Err(fail("PNO labels take no refinement options"));
        }
        Ok(label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for s in [
            "SPA+GSD/MRA(2,4)[it=3]",
            "FCI/MRA(4,8)[opt=4,it=2]-SPA+GSD",
            "SPA/PNO(2,18)",
            "FCI/MRA(2,8)",
            "SPA+GS/MRA(4,8)[opt=2]",
        ] {
            let l: MethodLabel = s.parse().unwrap();
            assert_eq!(l.to_string(), s);
        }
    }

    #[test]
    fn wfn_option_is_an_alias_for_the_suffix() {
        let l: MethodLabel = "FCI/MRA(4,8)[it=1,wfn=SPA]".parse().unwrap();
        assert_eq!(l.refined_with.as_deref(), Some("SPA"));
        assert_eq!(l.to_string(), "FCI/MRA(4,8)[it=1]-SPA");
    }

    #[test]
    fn malformed_labels_are_rejected() {
        for s in ["FCI", "FCI/STO(2,4)", "FCI/MRA(2)", "FCI/MRA(2,4)[it=x]", "FCI/MRA(2,4)x", "FCI/PNO(2,4)[it=1]"] {
            assert!(s.parse::<MethodLabel>().is_err(), "{s}");
        }
    }
}
