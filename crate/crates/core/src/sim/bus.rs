//! Synchronous, lossless all-to-all exchange between agents.

use crate::error::{Error, Result};

/// Delivers every agent's payload to every other agent. Inbox `i` lists
/// `(sender, payload)` in ascending sender order and never contains agent
/// `i`'s own payload. A missing payload is an error.
pub fn message_bus_round<T: Clone>(payloads: &[Option<T>]) -> Result<Vec<Vec<(usize, T)>>> {
    if let Some(j) = payloads.iter().position(Option::is_none) {
        return Err(Error::MissingPayload(j));
    }
    Ok((0..payloads.len())
        .map(|i| {
            payloads
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(j, p)| (j, p.clone().expect("checked above")))
                .collect()
        })
        .collect())
}
