//! Hex-armored file interchange for keys and signatures: a small JSON
//! envelope carrying the parameter set plus one hex payload in the
//! canonical ring serialization.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::ring::{RingElement, RingPair};
use crate::scheme::{ParameterSet, Signature, SigningKey, VerificationKey};
use crate::Error;

pub const ENVELOPE_VERSION: u32 = 1;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeKind {
    SigningKey,
    VerificationKey,
    Signature,
}

/// On-disk form. Payloads: signing key = e0‖e1, verification key = s_e,
/// signature = c‖z0‖z1, all in little-endian coefficient bytes.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Envelope {
    pub version: u32,
    pub kind: EnvelopeKind,
    pub p: usize,
    pub w_e: usize,
    pub w_y: usize,
    pub w_c: usize,
    pub h_seed: u64,
    pub payload: String,
}

impl Envelope {
    fn new(kind: EnvelopeKind, params: &ParameterSet, payload: Vec<u8>) -> Self {
        Envelope {
            version: ENVELOPE_VERSION,
            kind,
            p: params.p,
            w_e: params.w_e,
            w_y: params.w_y,
            w_c: params.w_c,
            h_seed: params.h_seed,
            payload: hex::encode(payload),
        }
    }

    pub fn params(&self) -> Result<ParameterSet, Error> {
        ParameterSet::new(self.p, self.w_e, self.w_y, self.w_c, self.h_seed)
    }

    fn check(&self, want: EnvelopeKind) -> Result<Vec<u8>, Error> {
        if self.version != ENVELOPE_VERSION {
            return Err(Error::Format(format!("unsupported envelope version {}", self.version)));
        }
        if self.kind != want {
            return Err(Error::Format(format!("expected {want:?} envelope, found {:?}", self.kind)));
        }
        hex::decode(&self.payload).map_err(|e| Error::Format(format!("bad hex payload: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelope serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("bad envelope: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<(), Error> {
        Ok(std::fs::write(path, self.to_json() + "\n")?)
    }

    pub fn read(path: &Path) -> Result<Self, Error> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

pub fn seal_signing_key(params: &ParameterSet, sk: &SigningKey) -> Envelope {
    Envelope::new(EnvelopeKind::SigningKey, params, sk.e.to_bytes())
}

pub fn open_signing_key(env: &Envelope) -> Result<(ParameterSet, SigningKey), Error> {
    let params = env.params()?;
    let bytes = env.check(EnvelopeKind::SigningKey)?;
    let e = RingPair::from_bytes(params.p, &bytes)?;
    if e.weight() != params.w_e {
        return Err(Error::Format(format!(
            "signing key has weight {}, parameters say {}",
            e.weight(),
            params.w_e
        )));
    }
    Ok((params, SigningKey { e }))
}

pub fn seal_verification_key(params: &ParameterSet, vk: &VerificationKey) -> Envelope {
    Envelope::new(EnvelopeKind::VerificationKey, params, vk.s_e.to_bytes())
}

pub fn open_verification_key(env: &Envelope) -> Result<(ParameterSet, VerificationKey), Error> {
    let params = env.params()?;
    let bytes = env.check(EnvelopeKind::VerificationKey)?;
    Ok((params, VerificationKey { s_e: RingElement::from_bytes(params.p, &bytes)? }))
}

pub fn seal_signature(params: &ParameterSet, sig: &Signature) -> Envelope {
    let mut payload = sig.c.to_bytes();
    payload.extend_from_slice(&sig.z.to_bytes());
    Envelope::new(EnvelopeKind::Signature, params, payload)
}

pub fn open_signature(env: &Envelope) -> Result<(ParameterSet, Signature), Error> {
    let params = env.params()?;
    let bytes = env.check(EnvelopeKind::Signature)?;
    let nbytes = params.p.div_ceil(8);
    if bytes.len() != 3 * nbytes {
        return Err(Error::Format(format!(
            "signature payload is {} bytes, expected {}",
            bytes.len(),
            3 * nbytes
        )));
    }
    let c = RingElement::from_bytes(params.p, &bytes[..nbytes])?;
    let z = RingPair::from_bytes(params.p, &bytes[nbytes..])?;
    if c.weight() != params.w_c {
        return Err(Error::Format(format!(
            "challenge has weight {}, parameters say {}",
            c.weight(),
            params.w_c
        )));
    }
    Ok((params, Signature { c, z }))
}
