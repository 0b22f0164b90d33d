use crate::wfn::SpinSummedRdms;

/// Densities over `[core ++ active]` for `n_core` doubly occupied core
/// orbitals uncorrelated with the active state.
pub fn embed_frozen_core(active: &SpinSummedRdms, n_core: usize) -> SpinSummedRdms {
    let na = active.n;
    let n = n_core + na;
    let mut out = SpinSummedRdms::closed_shell(n, n_core);
    for a in 0..na {
        for b in 0..na {
            let d = active.d1[(a, b)];
            let (pa, pb) = (n_core + a, n_core + b);
            out.d1[(pa, pb)] = d;
            for c in 0..n_core {
                for idx in [out.index(c, pa, c, pb), out.index(pa, c, pb, c)] {
                    out.d2[idx] += 2.0 * d;
                }
                for idx in [out.index(c, pa, pb, c), out.index(pa, c, c, pb)] {
                    out.d2[idx] -= d;
                }
            }
            for k in 0..na {
                for l in 0..na {
                    let idx = out.index(pa, n_core + k, pb, n_core + l);
                    out.d2[idx] = active.d2(a, k, b, l);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activespace::freeze_core;
    use crate::secondq::IntegralTensors;
    use crate::wfn::{fci, measure_rdms};

    #[test]
    fn embedded_energy_matches_frozen_core_energy() {
        let t = IntegralTensors::random(4, 21);
        let f = freeze_core(&t, &[0], &[1, 2, 3]).unwrap();
        let res = fci(&f, 2).unwrap();
        let rdms = measure_rdms(&res.state().unwrap(), 3).unwrap();
        let full = embed_frozen_core(&rdms, 1);
        let e = t.energy(&full.d1, &full.d2);
        assert!((e - res.energy).abs() < 1e-10, "{e} vs {}", res.energy);
        full.check(4, 1e-8).unwrap();
    }

    #[test]
    fn no_core_is_identity() {
        let t = IntegralTensors::random(2, 5);
        let res = fci(&t, 2).unwrap();
        let rdms = measure_rdms(&res.state().unwrap(), 2).unwrap();
        let e = embed_frozen_core(&rdms, 0);
        assert_eq!(e.d1, rdms.d1);
        assert_eq!(e.d2, rdms.d2);
    }
}
