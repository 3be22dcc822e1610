use serde::de::{self, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::series::C64;

/// A complex number on the wire. Written as `{"re": .., "im": ..}`; a bare
/// number or a `[re, im]` pair is also accepted on input.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cplx(pub C64);

impl From<C64> for Cplx {
    fn from(z: C64) -> Self {
        Cplx(z)
    }
}

impl From<f64> for Cplx {
    fn from(x: f64) -> Self {
        Cplx(C64::new(x, 0.0))
    }
}

impl Serialize for Cplx {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Cplx", 2)?;
        st.serialize_field("re", &self.0.re)?;
        st.serialize_field("im", &self.0.im)?;
        st.end()
    }
}

struct CplxVisitor;

impl<'de> Visitor<'de> for CplxVisitor {
    type Value = Cplx;

    fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        f.write_str("a number, a [re, im] pair or an object {re, im}")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Cplx, E> {
        Ok(Cplx(C64::new(v, 0.0)))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Cplx, E> {
        Ok(Cplx(C64::new(v as f64, 0.0)))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Cplx, E> {
        Ok(Cplx(C64::new(v as f64, 0.0)))
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Cplx, A::Error> {
        let re: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
        let im: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
        if seq.next_element::<f64>()?.is_some() {
            return Err(de::Error::invalid_length(3, &self));
        }
        Ok(Cplx(C64::new(re, im)))
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Cplx, A::Error> {
        let mut re = None;
        let mut im = None;
        while let Some(key) = map.next_key::<String>()? {
            match key.as_str() {
                "re" => re = Some(map.next_value::<f64>()?),
                "im" => im = Some(map.next_value::<f64>()?),
                other => return Err(de::Error::unknown_field(other, &["re", "im"])),
            }
        }
        Ok(Cplx(C64::new(re.unwrap_or(0.0), im.unwrap_or(0.0))))
    }
}

impl<'de> Deserialize<'de> for Cplx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(CplxVisitor)
    }
}

/// `[[re, im], ...]` for series coefficients.
pub(crate) mod pairs {
    use super::*;
    use crate::series::PowerSeries;

    pub fn serialize<S: Serializer>(p: &PowerSeries, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<[f64; 2]> = p.coeffs().iter().map(|c| [c.re, c.im]).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<PowerSeries, D::Error> {
        let v: Vec<Cplx> = Vec::deserialize(d)?;
        PowerSeries::new(v.into_iter().map(|c| c.0).collect()).map_err(de::Error::custom)
    }
}
