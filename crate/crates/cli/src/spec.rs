//! Channel spec files and the built-in channel zoo.

use serde::{Deserialize, Serialize};

use tempocorr::channels::{self, CptpReport, KrausChannel};
use tempocorr::qmath::{gates, CMat};

use crate::output::{from_json_matrix, to_json_matrix, JsonMatrix};
use crate::CliError;

pub const SPEC_FORMAT: &str = "tempocorr-spec/1";

/// On-disk layout; field order here is the serialized order.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct WireSpec {
    format: String,
    name: String,
    d_in: usize,
    d_out: usize,
    kind: String,
    payload: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub name: String,
    pub d_in: usize,
    pub d_out: usize,
    pub body: SpecBody,
}

impl ChannelSpec {
    pub fn to_json(&self) -> String {
        let tagged = serde_json::to_value(&self.body).expect("serializable body");
        let wire = WireSpec {
            format: SPEC_FORMAT.into(),
            name: self.name.clone(),
            d_in: self.d_in,
            d_out: self.d_out,
            kind: self.body.kind().into(),
            payload: tagged["payload"].clone(),
        };
        crate::output::to_json(&wire)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let wire: WireSpec = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("spec: {e}")))?;
        if wire.format != SPEC_FORMAT {
            return Err(CliError::Parse(format!(
                "unsupported spec format {:?}, expected {SPEC_FORMAT:?}",
                wire.format
            )));
        }
        let tagged = serde_json::json!({ "kind": wire.kind, "payload": wire.payload });
        let body: SpecBody =
            serde_json::from_value(tagged).map_err(|e| CliError::Parse(format!("spec payload: {e}")))?;
        Ok(Self {
            name: wire.name,
            d_in: wire.d_in,
            d_out: wire.d_out,
            body,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum SpecBody {
    Kraus(Vec<JsonMatrix>),
    Unitary(JsonMatrix),
    CoherenceDestroying(Vec<Vec<f64>>),
    DepolarizedUnitary { unitary: JsonMatrix, eps: f64 },
}

impl SpecBody {
    pub fn kind(&self) -> &'static str {
        match self {
            SpecBody::Kraus(_) => "kraus",
            SpecBody::Unitary(_) => "unitary",
            SpecBody::CoherenceDestroying(_) => "coherence_destroying",
            SpecBody::DepolarizedUnitary { .. } => "depolarized_unitary",
        }
    }
}

/// A parsed spec whose payload is dimensionally consistent but not yet known
/// to be CPTP.
pub struct Resolved {
    pub spec: ChannelSpec,
    pub kraus: Vec<CMat>,
}

impl Resolved {
    pub fn cptp_report(&self) -> Result<CptpReport, CliError> {
        Ok(channels::is_cptp_kraus(&self.kraus)?)
    }

    pub fn channel(&self) -> Result<KrausChannel, CliError> {
        let report = self.cptp_report()?;
        if !report.cptp {
            return Err(CliError::NotCptp(report));
        }
        Ok(KrausChannel::new(self.kraus.clone())?)
    }

    /// The unitary V of a depolarized-unitary spec.
    pub fn depolarized_unitary(&self) -> Option<CMat> {
        match &self.spec.body {
            SpecBody::DepolarizedUnitary { unitary, .. } => from_json_matrix(unitary).ok(),
            _ => None,
        }
    }
}

fn check_shape(what: &str, m: &CMat, rows: usize, cols: usize) -> Result<(), CliError> {
    if m.shape() != (rows, cols) {
        return Err(CliError::Parse(format!(
            "{what} is {}x{}, expected {rows}x{cols}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

pub fn parse(text: &str) -> Result<Resolved, CliError> {
    let spec = ChannelSpec::from_json(text)?;
    let (d_in, d_out) = (spec.d_in, spec.d_out);
    if d_in == 0 || d_out == 0 {
        return Err(CliError::Parse("dimensions must be positive".into()));
    }
    let kraus = match &spec.body {
        SpecBody::Kraus(ms) => {
            if ms.is_empty() {
                return Err(CliError::Parse("kraus payload is empty".into()));
            }
            let mut out = Vec::with_capacity(ms.len());
            for (k, m) in ms.iter().enumerate() {
                let m = from_json_matrix(m)?;
                check_shape(&format!("Kraus operator {k}"), &m, d_out, d_in)?;
                out.push(m);
            }
            out
        }
        SpecBody::Unitary(m) => {
            let m = from_json_matrix(m)?;
            check_shape("unitary", &m, d_out, d_in)?;
            vec![m]
        }
        SpecBody::CoherenceDestroying(p) => {
            if p.len() != d_in || p.iter().any(|row| row.len() != d_out) {
                return Err(CliError::Parse(format!(
                    "probability table must be {d_in} rows of {d_out}"
                )));
            }
            channels::coherence_destroying(p)?.kraus().to_vec()
        }
        SpecBody::DepolarizedUnitary { unitary, eps } => {
            let v = from_json_matrix(unitary)?;
            check_shape("unitary", &v, d_out, d_in)?;
            if d_in != d_out {
                return Err(CliError::Parse("depolarized_unitary needs d_in = d_out".into()));
            }
            if !(0.0..=1.0).contains(eps) {
                return Err(CliError::Parse(format!("eps = {eps} outside [0, 1]")));
            }
            // written out so that a non-unitary V reaches the CPTP diagnostics
            let d = d_in;
            let mut kraus = vec![v.scale_real((1.0 - eps).sqrt())];
            let w = (eps / d as f64).sqrt();
            for i in 0..d {
                for j in 0..d {
                    kraus.push(CMat::unit(d, d, j, i).scale_real(w));
                }
            }
            kraus
        }
    };
    Ok(Resolved { spec, kraus })
}

fn spec(name: &str, d: usize, body: SpecBody) -> ChannelSpec {
    ChannelSpec {
        name: name.into(),
        d_in: d,
        d_out: d,
        body,
    }
}

pub const ZOO: &[&str] = &[
    "identity",
    "pauli_x",
    "pauli_y",
    "pauli_z",
    "hadamard",
    "dephasing",
    "reset",
    "classical_flip",
    "classical_uniform",
    "depolarized_unitary",
    "amplitude_damping",
];

pub fn zoo(name: &str) -> Option<ChannelSpec> {
    let unitary = |m: CMat| SpecBody::Unitary(to_json_matrix(&m));
    let body = match name {
        "identity" => unitary(CMat::identity(2)),
        "pauli_x" => unitary(gates::pauli_x()),
        "pauli_y" => unitary(gates::pauli_y()),
        "pauli_z" => unitary(gates::pauli_z()),
        "hadamard" => unitary(gates::hadamard()),
        "dephasing" => SpecBody::CoherenceDestroying(vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
        "reset" => SpecBody::CoherenceDestroying(vec![vec![1.0, 0.0], vec![1.0, 0.0]]),
        "classical_flip" => SpecBody::CoherenceDestroying(vec![vec![0.1, 0.9], vec![0.9, 0.1]]),
        "classical_uniform" => SpecBody::CoherenceDestroying(vec![vec![0.5, 0.5], vec![0.5, 0.5]]),
        "depolarized_unitary" => SpecBody::DepolarizedUnitary {
            unitary: to_json_matrix(&CMat::identity(2)),
            eps: 0.1,
        },
        "amplitude_damping" => {
            let ch = channels::amplitude_damping(0.3).expect("valid damping");
            SpecBody::Kraus(ch.kraus().iter().map(to_json_matrix).collect())
        }
        _ => return None,
    };
    Some(spec(name, 2, body))
}
