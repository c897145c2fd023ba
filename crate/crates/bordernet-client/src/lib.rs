//! Client for the bordernet benchmark service.
//!
//! [`wire`] holds the JSON request/response types and is always available;
//! the HTTP [`Client`] is behind the default-on `client` feature so the
//! server can share the wire types without pulling in an HTTP stack.

pub mod wire;

#[cfg(feature = "client")]
mod http;

#[cfg(feature = "client")]
pub use http::{Client, ClientError};

/// Encode binary payloads for JSON transport.
pub fn to_base64(bytes: &[u8]) -> String {
    use base64::Engine;
    base64::engine::general_purpose::STANDARD.encode(bytes)
}

/// Decode base64 payloads from JSON transport.
pub fn from_base64(text: &str) -> Result<Vec<u8>, base64::DecodeError> {
    use base64::Engine;
    base64::engine::general_purpose::STANDARD.decode(text)
}
