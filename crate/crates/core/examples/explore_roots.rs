//! The roots-of-unity equation for n = 1..=6, including how
//! conjugation-type maps fare for each n.

use wigner_check::explore::{explore_p2, Candidate, ExploreConfig, Problem, RuleKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let candidates = vec![
        Candidate::UnitaryPhase { rule: RuleKind::RootsOfUnity },
        Candidate::UnitaryPhase { rule: RuleKind::Seeded },
        Candidate::Conjugation,
        Candidate::PartialConjugation,
    ];
    for n in 1..=6 {
        let cfg = ExploreConfig { candidates: candidates.clone(), ..ExploreConfig::new(Problem::P2 { n }, 2, 3, 8, 1e-9) };
        let report = explore_p2(&cfg)?;
        println!("n = {n}: {}", report.evidence);
        for c in &report.candidates {
            println!("  {:<28} {:>10.3e} {:?}", c.label, c.max_residual, c.classification);
        }
    }
    Ok(())
}
