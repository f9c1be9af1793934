//! Region selection.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::config::SelectionMode;
use crate::labelmap::{ClassId, Region};

/// Indices into `regions` of at most `k` selected regions, in priority order.
///
/// `Largest` ranks by area (descending), keeping the input order on ties;
/// `Random` shuffles. With `diversity`, classes are drawn round-robin in
/// ranking order, starting with the class of the top-ranked region, so the
/// per-class counts differ by at most one whenever enough regions exist.
pub fn select_regions<R: Rng + ?Sized>(
    regions: &[Region],
    k: usize,
    mode: SelectionMode,
    diversity: bool,
    rng: &mut R,
) -> Vec<usize> {
    let mut order: Vec<usize> = (0..regions.len()).collect();
    match mode {
        SelectionMode::Largest => order.sort_by_key(|&i| std::cmp::Reverse(regions[i].area())),
        SelectionMode::Random => order.shuffle(rng),
    }
    if !diversity {
        order.truncate(k);
        return order;
    }

    let mut queues: Vec<(ClassId, std::collections::VecDeque<usize>)> = Vec::new();
    for &i in &order {
        let class = regions[i].class();
        match queues.iter_mut().find(|(c, _)| *c == class) {
            Some((_, q)) => q.push_back(i),
            None => queues.push((class, [i].into())),
        }
    }
    let mut picked = Vec::with_capacity(k.min(order.len()));
    while picked.len() < k && queues.iter().any(|(_, q)| !q.is_empty()) {
        for (_, q) in queues.iter_mut() {
            if picked.len() == k {
                break;
            }
            if let Some(i) = q.pop_front() {
                picked.push(i);
            }
        }
    }
    picked
}
