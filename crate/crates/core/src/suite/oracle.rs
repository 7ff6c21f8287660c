//! Brute-force oracles that share no search code with the library.

use crate::finder::{tuple_at, Structure};
use crate::index::IndexSet;
use crate::logic::Signature;

/// Every structure on `{0, .., size-1}`, counting through all table entries.
pub fn all_structures(sig: &Signature, size: usize) -> Vec<Structure> {
    // (kind, symbol, tuple, radix): kind 0 relation, 1 function, 2 constant
    let mut slots: Vec<(u8, usize, Vec<usize>, usize)> = Vec::new();
    for (r, (_, k)) in sig.relations.iter().enumerate() {
        for i in 0..size.pow(*k as u32) {
            slots.push((0, r, tuple_at(i, *k, size), 2));
        }
    }
    for (f, (_, k)) in sig.functions.iter().enumerate() {
        for i in 0..size.pow(*k as u32) {
            slots.push((1, f, tuple_at(i, *k, size), size));
        }
    }
    for c in 0..sig.constants.len() {
        slots.push((2, c, Vec::new(), size));
    }
    let mut digits = vec![0usize; slots.len()];
    let mut out = Vec::new();
    loop {
        let mut m = Structure::new(sig, size).expect("nonempty domain");
        for ((kind, sym, tuple, _), &d) in slots.iter().zip(&digits) {
            match kind {
                0 => m.set_relation(*sym, tuple, d == 1),
                1 => m.set_function(*sym, tuple, d),
                _ => m.set_constant(*sym, d),
            }
            .expect("in range");
        }
        out.push(m);
        let mut i = 0;
        loop {
            if i == digits.len() {
                return out;
            }
            digits[i] += 1;
            if digits[i] < slots[i].3 {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Structures of every size in `1..=bound`.
pub fn structures_up_to(sig: &Signature, bound: usize) -> Vec<Structure> {
    (1..=bound).flat_map(|n| all_structures(sig, n)).collect()
}

/// Downward-closed families of subsets of `{0, .., k-1}`, the empty family included.
pub fn down_sets(k: usize) -> Vec<Vec<IndexSet>> {
    let n = 1usize << k;
    let closed = |fam: u64| (0..n).all(|t| fam >> t & 1 == 0 || IndexSet(t as u32).iter().all(|i| fam >> IndexSet(t as u32).without(i).position() & 1 == 1));
    (0u64..1 << n).filter(|&f| closed(f)).map(|f| (0..n).filter(|&t| f >> t & 1 == 1).map(|t| IndexSet(t as u32)).collect()).collect()
}
