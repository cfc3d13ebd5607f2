use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use super::apply::apply_patch;
use super::edit::Patch;
use crate::ir::Module;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("no valid children in {0} attempts")]
pub struct CrossoverError(pub usize);

#[derive(Clone, Debug, PartialEq)]
pub struct Offspring {
    pub children: (Patch, Patch),
    /// 1 when the first shuffle and cut already gave two valid children.
    pub attempts: usize,
}

/// One-point messy crossover: pool both edit lists, shuffle, cut at a
/// uniform point in `[0, len]`. Retried until both children apply and pass
/// `valid`, at most `budget` times.
pub fn crossover<R: Rng + ?Sized>(
    a: &Patch,
    b: &Patch,
    original: &Module,
    budget: usize,
    rng: &mut R,
    valid: &dyn Fn(&Module) -> bool,
) -> Result<Offspring, CrossoverError> {
    let ok = |p: &Patch| apply_patch(original, p).is_ok_and(|applied| valid(&applied.module));
    for attempt in 1..=budget {
        let mut pool: Vec<_> = a.edits.iter().chain(&b.edits).cloned().collect();
        pool.shuffle(rng);
        let cut = rng.gen_range(0..=pool.len());
        let second = pool.split_off(cut);
        let children = (Patch::new(pool), Patch::new(second));
        if ok(&children.0) && ok(&children.1) {
            return Ok(Offspring { children, attempts: attempt });
        }
    }
    Err(CrossoverError(budget))
}
