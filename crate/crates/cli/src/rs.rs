use anyhow::{anyhow, Result};
use qrmark::rscodec::{bw_decode, rs_encode};
use qrmark::Bits;
use serde_json::json;

use crate::args::RsOp;
use crate::Outcome;

pub fn run(op: &RsOp) -> Result<Outcome> {
    match op {
        RsOp::Encode { profile, msg, .. } => {
            let bits = Bits::parse(msg, profile.fixed_payload_bits())?;
            let params = profile.params(bits.len())?;
            let cw = rs_encode(&bits, &params)?;
            println!("{}", cw.bits().to_hex());
            Ok(Outcome::printed(json!({
                "profile": profile.to_string(),
                "n": params.n(),
                "k": params.k(),
                "message": bits,
                "codeword": cw.bits(),
                "codeword_bits": cw.bits().len(),
            })))
        }
        RsOp::Decode { profile, word, payload_bits, .. } => {
            let payload = payload_bits
                .or(profile.fixed_payload_bits())
                .ok_or_else(|| anyhow!("profile {profile} needs --payload-bits"))?;
            let params = profile.params(payload)?;
            let received = Bits::parse(word, Some(params.codeword_bits()))?;
            let d = bw_decode(&received, &params)?;
            println!("{} errors_corrected={}", d.message.to_hex(), d.errors_corrected);
            Ok(Outcome::printed(json!({
                "profile": profile.to_string(),
                "received": received,
                "message": d.message,
                "codeword": d.codeword.bits(),
                "errors_corrected": d.errors_corrected,
            })))
        }
    }
}

