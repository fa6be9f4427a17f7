//! JSON export of frequency families.

use serde::{Deserialize, Serialize};

use super::{FrequencyFamily, Parity};
use crate::error::Result;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MemberRecord {
    pub k: [i32; 3],
    pub a: [f64; 3],
    pub parity: Parity,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyRecord {
    pub parity: Parity,
    pub lambda_bar_sq: i32,
    pub r0: f64,
    pub members: Vec<MemberRecord>,
}

impl From<&FrequencyFamily> for FamilyRecord {
    fn from(f: &FrequencyFamily) -> Self {
        FamilyRecord {
            parity: f.parity,
            lambda_bar_sq: f.lambda_bar_sq,
            r0: f.r0,
            members: f
                .members
                .iter()
                .zip(&f.a)
                .map(|(k, a)| MemberRecord {
                    k: *k,
                    a: *a,
                    parity: f.parity,
                })
                .collect(),
        }
    }
}

impl FamilyRecord {
    /// Rebuilds the family, re-running every invariant.
    pub fn into_family(self) -> Result<FrequencyFamily> {
        let fam = FrequencyFamily::from_parts(
            self.parity,
            self.members.iter().map(|m| m.k).collect(),
            self.members.iter().map(|m| m.a).collect(),
            Some(self.r0),
        )?;
        if fam.lambda_bar_sq != self.lambda_bar_sq {
            return Err(crate::Error::FamilyInvariant(format!(
                "modulus: file says |k|² = {}",
                self.lambda_bar_sq
            )));
        }
        if let Some(m) = self.members.iter().find(|m| m.parity != self.parity) {
            return Err(crate::Error::FamilyInvariant(format!(
                "parity tag of k = {:?} differs from the family",
                m.k
            )));
        }
        let certified = super::certify_r0(&fam)?;
        if fam.r0 > certified * (1.0 + 1e-12) {
            return Err(crate::Error::FamilyInvariant(format!(
                "r0 = {} exceeds the certified radius {certified}",
                fam.r0
            )));
        }
        Ok(fam)
    }
}

pub fn to_json(families: &[&FrequencyFamily]) -> Result<String> {
    let recs: Vec<FamilyRecord> = families.iter().map(|f| FamilyRecord::from(*f)).collect();
    Ok(serde_json::to_string_pretty(&recs)?)
}

pub fn from_json(s: &str) -> Result<Vec<FrequencyFamily>> {
    let recs: Vec<FamilyRecord> = serde_json::from_str(s)?;
    recs.into_iter().map(FamilyRecord::into_family).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beltrami::build_families;

    #[test]
    fn roundtrip_and_corruption() {
        let (e, o) = build_families().unwrap();
        let s = to_json(&[&e, &o]).unwrap();
        let back = from_json(&s).unwrap();
        assert_eq!(back[0].members, e.members);
        assert_eq!(back[1].r0, o.r0);
        let mut recs: Vec<FamilyRecord> = serde_json::from_str(&s).unwrap();
        recs[0].members[4].k = [0, 1, 3];
        let bad = serde_json::to_string(&recs).unwrap();
        let err = from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("invariant"), "{err}");
    }
}
