use std::collections::HashSet;
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::AlgebraError;

/// Z2 grading. `Odd` quantities anticommute and square to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_bit(bit: u32) -> Parity {
        if bit.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn bit(self) -> u32 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    pub fn flip(self) -> Parity {
        Parity::from_bit(self.bit() + 1)
    }

    /// `(-1)^(self * other)`.
    pub fn sign_with(self, other: Parity) -> i32 {
        if self.is_odd() && other.is_odd() {
            -1
        } else {
            1
        }
    }
}

impl Add for Parity {
    type Output = Parity;

    fn add(self, rhs: Parity) -> Parity {
        Parity::from_bit(self.bit() + rhs.bit())
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => f.write_str("even"),
            Parity::Odd => f.write_str("odd"),
        }
    }
}

impl std::str::FromStr for Parity {
    type Err = AlgebraError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            other => Err(AlgebraError::InvalidContext(format!(
                "parity must be `even` or `odd`, got `{other}`"
            ))),
        }
    }
}

/// A field or an antifield of a [`FieldContext`].
///
/// Field `i` is encoded as `2i`, its antifield as `2i + 1`, which is also the
/// canonical declaration order used to sort jet variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Owner(u32);

impl Owner {
    pub fn field(index: usize) -> Owner {
        Owner(2 * index as u32)
    }

    pub fn antifield(index: usize) -> Owner {
        Owner(2 * index as u32 + 1)
    }

    pub fn field_index(self) -> usize {
        (self.0 / 2) as usize
    }

    pub fn is_antifield(self) -> bool {
        self.0 % 2 == 1
    }

    /// The canonically conjugate partner: `q <-> q†`.
    pub fn conjugate(self) -> Owner {
        Owner(self.0 ^ 1)
    }

    pub fn raw(self) -> u32 {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldDecl {
    pub name: String,
    pub parity: Parity,
    pub antifield: String,
}

/// Independent variables plus field/antifield declarations.
///
/// Every field carries a conjugate antifield of opposite parity. Densities
/// never depend explicitly on the independent variables; their names are
/// reserved so the parser can reject them.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldContext {
    indep: Vec<String>,
    fields: Vec<FieldDecl>,
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

const RESERVED: [&str; 3] = ["exp", "sin", "cos"];

impl FieldContext {
    pub fn new(indep: Vec<String>, fields: Vec<FieldDecl>) -> Result<FieldContext, AlgebraError> {
        if indep.is_empty() {
            return Err(AlgebraError::InvalidContext(
                "at least one independent variable is required".into(),
            ));
        }
        let mut seen = HashSet::new();
        let names = indep
            .iter()
            .chain(fields.iter().flat_map(|f| [&f.name, &f.antifield]));
        for name in names {
            if !is_identifier(name) {
                return Err(AlgebraError::InvalidContext(format!(
                    "`{name}` is not an ASCII identifier"
                )));
            }
            if RESERVED.contains(&name.as_str()) {
                return Err(AlgebraError::InvalidContext(format!(
                    "`{name}` is a reserved function name"
                )));
            }
            if !seen.insert(name.as_str()) {
                return Err(AlgebraError::InvalidContext(format!(
                    "name `{name}` is declared twice"
                )));
            }
        }
        Ok(FieldContext { indep, fields })
    }

    /// One independent variable `x`, an even field `q` with odd antifield `p`.
    pub fn single_even_field() -> FieldContext {
        FieldContext::new(
            vec!["x".into()],
            vec![FieldDecl {
                name: "q".into(),
                parity: Parity::Even,
                antifield: "p".into(),
            }],
        )
        .expect("builtin context is valid")
    }

    pub fn dim(&self) -> usize {
        self.indep.len()
    }

    pub fn independent_vars(&self) -> &[String] {
        &self.indep
    }

    pub fn fields(&self) -> &[FieldDecl] {
        &self.fields
    }

    pub fn owner_count(&self) -> usize {
        2 * self.fields.len()
    }

    /// Fields and antifields in declaration order.
    pub fn owners(&self) -> impl Iterator<Item = Owner> + '_ {
        (0..self.owner_count() as u32).map(Owner)
    }

    pub fn parity(&self, owner: Owner) -> Parity {
        let decl = &self.fields[owner.field_index()];
        if owner.is_antifield() {
            decl.parity.flip()
        } else {
            decl.parity
        }
    }

    pub fn name(&self, owner: Owner) -> &str {
        let decl = &self.fields[owner.field_index()];
        if owner.is_antifield() {
            &decl.antifield
        } else {
            &decl.name
        }
    }

    pub fn lookup(&self, name: &str) -> Option<Owner> {
        self.fields.iter().enumerate().find_map(|(i, f)| {
            if f.name == name {
                Some(Owner::field(i))
            } else if f.antifield == name {
                Some(Owner::antifield(i))
            } else {
                None
            }
        })
    }

    pub fn is_independent(&self, name: &str) -> bool {
        self.indep.iter().any(|x| x == name)
    }

    pub fn contains(&self, owner: Owner) -> bool {
        (owner.raw() as usize) < self.owner_count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antifield_has_opposite_parity() {
        let ctx = FieldContext::single_even_field();
        let q = ctx.lookup("q").unwrap();
        let p = ctx.lookup("p").unwrap();
        assert_eq!(ctx.parity(q), Parity::Even);
        assert_eq!(ctx.parity(p), Parity::Odd);
        assert_eq!(q.conjugate(), p);
        assert!(p.is_antifield());
    }

    #[test]
    fn rejects_duplicate_and_reserved_names() {
        let dup = FieldContext::new(
            vec!["x".into()],
            vec![FieldDecl {
                name: "x".into(),
                parity: Parity::Even,
                antifield: "p".into(),
            }],
        );
        assert!(dup.is_err());
        let reserved = FieldContext::new(
            vec!["x".into()],
            vec![FieldDecl {
                name: "exp".into(),
                parity: Parity::Even,
                antifield: "p".into(),
            }],
        );
        assert!(reserved.is_err());
        assert!(FieldContext::new(vec![], vec![]).is_err());
    }

    #[test]
    fn parity_arithmetic() {
        assert_eq!(Parity::Odd + Parity::Odd, Parity::Even);
        assert_eq!(Parity::Odd + Parity::Even, Parity::Odd);
        assert_eq!(Parity::Odd.sign_with(Parity::Odd), -1);
        assert_eq!(Parity::Odd.sign_with(Parity::Even), 1);
    }
}
