//! Minimal headless client, used by bots and tests.

use std::time::Duration;

use futures::{SinkExt, StreamExt};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

use crate::protocol::{decode, encode, ClientMessage, ServerMessage};

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("websocket error: {0}")]
    Socket(#[from] tokio_tungstenite::tungstenite::Error),
    #[error("server sent an unreadable frame: {0}")]
    Frame(String),
    #[error("connection closed")]
    Closed,
    #[error("no message within {0:?}")]
    Timeout(Duration),
}

pub struct WsClient {
    socket: WebSocketStream<MaybeTlsStream<TcpStream>>,
    seq: u64,
    last_server_seq: u64,
}

impl WsClient {
    /// Connects to `url`, e.g. `ws://127.0.0.1:8080/ws`.
    pub async fn connect(url: &str) -> Result<Self, ClientError> {
        let (socket, _) = connect_async(url).await?;
        Ok(WsClient { socket, seq: 0, last_server_seq: 0 })
    }

    pub async fn send(&mut self, msg: &ClientMessage) -> Result<(), ClientError> {
        self.seq += 1;
        self.socket.send(Message::Text(encode(&msg.to_envelope(self.seq)).into())).await?;
        Ok(())
    }

    /// Sends a raw text frame, bypassing the envelope.
    pub async fn send_raw(&mut self, frame: &str) -> Result<(), ClientError> {
        self.socket.send(Message::Text(frame.to_string().into())).await?;
        Ok(())
    }

    pub async fn recv(&mut self, within: Duration) -> Result<ServerMessage, ClientError> {
        loop {
            let frame = tokio::time::timeout(within, self.socket.next())
                .await
                .map_err(|_| ClientError::Timeout(within))?
                .ok_or(ClientError::Closed)??;
            let text = match frame {
                Message::Text(t) => t,
                Message::Close(_) => return Err(ClientError::Closed),
                _ => continue,
            };
            let env = decode(&text).map_err(|e| ClientError::Frame(e.detail))?;
            if env.seq <= self.last_server_seq {
                return Err(ClientError::Frame(format!("server seq {} after {}", env.seq, self.last_server_seq)));
            }
            self.last_server_seq = env.seq;
            return ServerMessage::from_envelope(&env).map_err(|e| ClientError::Frame(e.detail));
        }
    }

    pub async fn close(mut self) -> Result<(), ClientError> {
        self.socket.close(None).await?;
        Ok(())
    }
}
