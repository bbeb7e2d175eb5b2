//! Complex numbers on the wire as `{"re": .., "im": ..}`.

use faer::c64;
use serde::ser::{Serialize, SerializeStruct, Serializer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cplx(pub c64);

impl Serialize for Cplx {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Complex", 2)?;
        st.serialize_field("re", &self.0.re)?;
        st.serialize_field("im", &self.0.im)?;
        st.end()
    }
}

pub fn ser<S: Serializer>(z: &c64, s: S) -> Result<S::Ok, S::Error> {
    Cplx(*z).serialize(s)
}

pub fn ser_vec<S: Serializer>(v: &[c64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|&z| Cplx(z)))
}
