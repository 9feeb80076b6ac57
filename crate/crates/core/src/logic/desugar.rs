use super::{Formula, Strategic};

/// Rewrites `F`, `G` and the dual modality away.
///
/// * `F φ` becomes `true U φ`, `G φ` becomes `!(true U !φ)`.
/// * A negation at the top of a modality's path formula is absorbed into the
///   threshold: `<<C>>{⋈d} !ψ` becomes `<<C>>{mirror(⋈) 1-d} ψ`, since every
///   outcome measure gives `!ψ` probability `1 - μ(ψ)`.
/// * `[[C]]{⋈d} ψ` is `!<<C>>{⋈d} !ψ` and is rewritten through the previous rule.
///
/// The result is a fixpoint: `desugar(desugar(f)) == desugar(f)`.
pub fn desugar(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::Atom(_) => f.clone(),
        Formula::Not(g) => desugar(g).not(),
        Formula::Or(a, b) => desugar(a).or(desugar(b)),
        Formula::Next(g) => desugar(g).next(),
        Formula::Until(a, b) => desugar(a).until(desugar(b)),
        Formula::Eventually(g) => Formula::True.until(desugar(g)),
        Formula::Always(g) => Formula::True.until(desugar(g).not()).not(),
        Formula::Strategic(s) => {
            let mut path = desugar(&s.path);
            if s.dual {
                path = path.not();
            }
            let mut cmp = s.cmp;
            let mut threshold = s.threshold.clone();
            while let Formula::Not(inner) = path {
                path = *inner;
                cmp = cmp.mirror();
                threshold = threshold.complement();
            }
            let out = Formula::Strategic(Box::new(Strategic {
                coalition: s.coalition.clone(),
                dual: false,
                cmp,
                threshold,
                path,
            }));
            if s.dual {
                out.not()
            } else {
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn d(s: &str) -> String {
        desugar(&parse_formula(s).unwrap()).to_string()
    }

    #[test]
    fn eventually_becomes_until() {
        assert_eq!(d("<<C>>{>=1/3} F p"), "<<C>>{>=1/3}(true U p)");
    }

    #[test]
    fn dual_is_complemented() {
        assert_eq!(d("[[C]]{<1/4} X p"), "!<<C>>{>3/4}(X p)");
        assert_eq!(d("[[C]]{>=1} X !p"), "!<<C>>{<=0}(X !p)");
    }

    #[test]
    fn always_under_modality() {
        assert_eq!(d("<<C>>{>=1/4} G p"), "<<C>>{<=3/4}(true U !p)");
        assert_eq!(d("<<C>>{>0} G p"), "<<C>>{<1}(true U !p)");
    }

    #[test]
    fn always_at_state_level_stays_a_path_formula() {
        assert_eq!(d("G p"), "!(true U !p)");
    }

    #[test]
    fn nested_negations_cancel_in_pairs() {
        assert_eq!(d("<<C>>{>=1/4} !!X p"), "<<C>>{>=1/4}(X p)");
        assert_eq!(d("[[C]]{>=1/4} !X p"), "!<<C>>{>=1/4}(X p)");
    }

    #[test]
    fn idempotent_on_examples() {
        for s in [
            "[[a,b]]{<=1/2} G (p | <<a>>{>1/3} F q)",
            "G F p",
            "<<*>>{>=1} (p U !q) -> [[]]{<1} X r",
        ] {
            let once = desugar(&parse_formula(s).unwrap());
            assert_eq!(desugar(&once), once, "{s}");
        }
    }
}
