use serde::Serialize;

use crate::expr::Parity;

fn sign_of(exponent: i64) -> i32 {
    if exponent.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// `(-1)^((|F|-1)(|G|-1))`, the sign in front of the second bracket on the
/// right-hand side of the Jacobi identity.
pub fn eq1_sign(f: Parity, g: Parity) -> i32 {
    sign_of((f.bit() as i64 - 1) * (g.bit() as i64 - 1))
}

/// One row of the reordering ledger for `[[G,[[F,H]]]]`: the sign written
/// next to the summand, the sign from reordering the factors to put `F`
/// before `G`, the Jacobi sign, and their product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LedgerEntry {
    pub index: u8,
    pub written: i32,
    pub reorder: i32,
    pub jacobi: i32,
    pub composite: i32,
}

/// The closed form each composite sign is expected to reduce to.
pub fn ledger_closed_form(index: u8, f: Parity, g: Parity) -> i32 {
    let (f, g) = (f.bit() as i64, g.bit() as i64);
    match index {
        1 => sign_of(f - 1),
        2 => sign_of(g - 1),
        3 => sign_of(f + g),
        4 => -1,
        5 | 6 => sign_of(g),
        7 | 8 => 1,
        _ => panic!("ledger index {index} out of range 1..=8"),
    }
}

/// Evaluates the three factors for each of the eight summands with integer
/// exponents and multiplies them out.
pub fn reorder_sign_ledger(f: Parity, g: Parity) -> [LedgerEntry; 8] {
    let (fi, gi) = (f.bit() as i64, g.bit() as i64);
    let jacobi = eq1_sign(f, g);
    let factors = |index: u8| -> (i32, i32) {
        match index {
            1 => (1, sign_of((fi - 1) * gi)),
            2 => (sign_of(fi), sign_of(fi * gi)),
            3 => (-1, sign_of((fi - 2) * gi)),
            4 => (-sign_of(fi - 1), sign_of((fi - 1) * gi)),
            5 | 6 => (-1, sign_of(fi * (gi - 1))),
            7 | 8 => (1, sign_of((fi - 1) * (gi - 1))),
            _ => unreachable!(),
        }
    };
    std::array::from_fn(|i| {
        let index = i as u8 + 1;
        let (written, reorder) = factors(index);
        LedgerEntry {
            index,
            written,
            reorder,
            jacobi,
            composite: written * reorder * jacobi,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composites_reduce_to_closed_forms() {
        for f in [Parity::Even, Parity::Odd] {
            for g in [Parity::Even, Parity::Odd] {
                for e in reorder_sign_ledger(f, g) {
                    assert_eq!(
                        e.composite,
                        ledger_closed_form(e.index, f, g),
                        "{f} {g} {e:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn odd_odd_values() {
        let l = reorder_sign_ledger(Parity::Odd, Parity::Odd);
        let got: Vec<i32> = l.iter().map(|e| e.composite).collect();
        assert_eq!(got, vec![1, 1, 1, -1, -1, -1, 1, 1]);
        assert_eq!(eq1_sign(Parity::Odd, Parity::Odd), 1);
        assert_eq!(eq1_sign(Parity::Even, Parity::Even), -1);
    }
}
