//! Room registry, per-room actors and the WebSocket endpoint.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use newsduel_core::game::{GameConfig, Role};
use newsduel_core::log::MatchLog;
use newsduel_core::opinion::OpinionBackend;
use rand::Rng;
use tokio::sync::{mpsc, oneshot};
use tracing::{debug, info, warn};

use crate::protocol::{decode, encode, BackendChoice, ClientMessage, ErrorCode, ServerMessage, WireError};
use crate::room::{timed_evaluate, ConnId, Recipient, Room, Step};

pub const DEFAULT_MAX_ROOMS: usize = 64;
const CODE_CHARS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

pub struct HubConfig {
    pub game: Arc<GameConfig>,
    pub backends: HashMap<BackendChoice, Arc<dyn OpinionBackend>>,
    pub default_backend: BackendChoice,
    /// `None` disables match logs.
    pub log_dir: Option<PathBuf>,
    pub max_rooms: usize,
}

type ConnSender = mpsc::UnboundedSender<ServerMessage>;

enum Command {
    Join { conn: ConnId, role: Role, tx: ConnSender, reply: oneshot::Sender<Result<(), WireError>> },
    Message { conn: ConnId, msg: ClientMessage },
    Leave { conn: ConnId },
}

type Rooms = Arc<Mutex<HashMap<String, mpsc::UnboundedSender<Command>>>>;

pub struct Hub {
    config: HubConfig,
    rooms: Rooms,
    next_conn: AtomicU64,
}

/// Six characters from `A-Z0-9`.
pub fn generate_code(rng: &mut impl Rng) -> String {
    (0..6).map(|_| CODE_CHARS[rng.random_range(0..CODE_CHARS.len())] as char).collect()
}

impl Hub {
    pub fn new(config: HubConfig) -> Arc<Self> {
        Arc::new(Hub { config, rooms: Arc::default(), next_conn: AtomicU64::new(1) })
    }

    pub fn room_count(&self) -> usize {
        self.rooms.lock().unwrap().len()
    }

    /// Opens a room running `choice` (or the default backend) and starts its actor.
    pub fn create_room(&self, choice: Option<BackendChoice>) -> Result<String, WireError> {
        let choice = choice.unwrap_or(self.config.default_backend);
        let backend = self.config.backends.get(&choice).cloned().ok_or_else(|| {
            WireError::new(ErrorCode::BackendUnavailable, format!("backend {choice:?} is not configured on this server"))
        })?;
        let mut rooms = self.rooms.lock().unwrap();
        if rooms.len() >= self.config.max_rooms {
            return Err(WireError::new(ErrorCode::CapacityExceeded, format!("{} rooms are open", rooms.len())));
        }
        let mut rng = rand::rng();
        let code = loop {
            let c = generate_code(&mut rng);
            if !rooms.contains_key(&c) {
                break c;
            }
        };
        let log = match &self.config.log_dir {
            Some(dir) => Some(
                MatchLog::create(dir, &code).map_err(|e| WireError::new(ErrorCode::LogFailure, e.to_string()))?,
            ),
            None => None,
        };
        let room = Room::new(code.clone(), Arc::clone(&self.config.game), backend, log)?;
        let (tx, rx) = mpsc::unbounded_channel();
        rooms.insert(code.clone(), tx);
        tokio::spawn(run_room(room, rx, Arc::clone(&self.rooms)));
        info!(room = %code, backend = ?choice, "room created");
        Ok(code)
    }

    fn room(&self, code: &str) -> Option<mpsc::UnboundedSender<Command>> {
        self.rooms.lock().unwrap().get(&code.to_ascii_uppercase()).cloned()
    }

    fn next_conn(&self) -> ConnId {
        self.next_conn.fetch_add(1, Ordering::Relaxed)
    }
}

fn dispatch(room: &Room, senders: &HashMap<ConnId, ConnSender>, out: Vec<crate::room::Outbound>) {
    for o in out {
        let targets: Vec<ConnId> = match o.to {
            Recipient::Seat(role) => room.seat(role).into_iter().collect(),
            Recipient::Both => Role::ALL.iter().filter_map(|r| room.seat(*r)).collect(),
        };
        for conn in targets {
            if let Some(tx) = senders.get(&conn) {
                let _ = tx.send(o.msg.clone());
            }
        }
    }
}

/// The room's single executor: every mutation goes through this loop.
async fn run_room(mut room: Room, mut rx: mpsc::UnboundedReceiver<Command>, rooms: Rooms) {
    let mut senders: HashMap<ConnId, ConnSender> = HashMap::new();
    while let Some(cmd) = rx.recv().await {
        match cmd {
            Command::Join { conn, role, tx, reply } => match room.join(conn, role) {
                Ok(joined) => {
                    let _ = tx.send(joined);
                    senders.insert(conn, tx);
                    let _ = reply.send(Ok(()));
                }
                Err(e) => {
                    let _ = reply.send(Err(e));
                }
            },
            Command::Message { conn, msg } => {
                let Some(role) = room.seat_of(conn) else {
                    if let Some(tx) = senders.get(&conn) {
                        let _ = tx.send(WireError::new(ErrorCode::NotSeated, "not seated in this room").into());
                    }
                    continue;
                };
                let out = match room.prepare(role, msg) {
                    Step::Done(out) => out,
                    Step::Evaluate(job) => {
                        let backend = room.backend();
                        let joined = tokio::task::spawn_blocking(move || {
                            let (result, ms) = timed_evaluate(&*backend, &job);
                            (job, result, ms)
                        })
                        .await;
                        match joined {
                            Ok((job, result, ms)) => room.complete(*job, result, Some(ms)),
                            Err(e) => {
                                warn!(room = %room.code(), error = %e, "evaluation task died");
                                vec![crate::room::Outbound {
                                    to: Recipient::Seat(role),
                                    msg: WireError::new(ErrorCode::BackendFailure, "evaluation crashed; publish again").into(),
                                }]
                            }
                        }
                    }
                };
                dispatch(&room, &senders, out);
            }
            Command::Leave { conn } => {
                room.leave(conn);
                senders.remove(&conn);
                if room.is_empty() && room.state().is_finished() {
                    break;
                }
            }
        }
    }
    rooms.lock().unwrap().remove(room.code());
    info!(room = %room.code(), "room closed");
}

/// `GET /ws` upgrades to the game protocol; `GET /health` answers `ok`.
pub fn router(hub: Arc<Hub>) -> Router {
    Router::new()
        .route("/ws", get(ws_handler))
        .route("/health", get(|| async { "ok" }))
        .with_state(hub)
}

pub async fn serve(listener: tokio::net::TcpListener, hub: Arc<Hub>) -> std::io::Result<()> {
    info!(addr = ?listener.local_addr().ok(), "listening");
    axum::serve(listener, router(hub)).await
}

async fn ws_handler(ws: WebSocketUpgrade, State(hub): State<Arc<Hub>>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| connection(socket, hub))
}

async fn connection(socket: WebSocket, hub: Arc<Hub>) {
    let conn = hub.next_conn();
    debug!(conn, "connected");
    let (mut sink, mut stream) = socket.split();
    let (tx, mut rx) = mpsc::unbounded_channel::<ServerMessage>();
    let writer = tokio::spawn(async move {
        let mut seq = 0;
        while let Some(msg) = rx.recv().await {
            seq += 1;
            let frame = encode(&msg.to_envelope(seq));
            if sink.send(Message::Text(frame.into())).await.is_err() {
                break;
            }
        }
        let _ = sink.close().await;
    });

    let mut seat: Option<mpsc::UnboundedSender<Command>> = None;
    let mut last_seq = 0;
    while let Some(Ok(frame)) = stream.next().await {
        let text = match frame {
            Message::Text(t) => t,
            Message::Close(_) => break,
            _ => continue,
        };
        let reply_err = |e: WireError| {
            let _ = tx.send(e.into());
        };
        let env = match decode(&text) {
            Ok(env) => env,
            Err(e) => {
                reply_err(e);
                continue;
            }
        };
        if env.seq <= last_seq {
            reply_err(WireError::new(ErrorCode::BadSequence, format!("seq {} after {last_seq}", env.seq)));
            continue;
        }
        last_seq = env.seq;
        let msg = match ClientMessage::from_envelope(&env) {
            Ok(m) => m,
            Err(e) => {
                reply_err(e);
                continue;
            }
        };
        match (&seat, msg) {
            (_, ClientMessage::CreateRoom { backend }) => match hub.create_room(backend) {
                Ok(code) => {
                    let _ = tx.send(ServerMessage::RoomCreated { code });
                }
                Err(e) => reply_err(e),
            },
            (None, ClientMessage::JoinRoom { code, role }) => {
                let Some(room_tx) = hub.room(&code) else {
                    reply_err(WireError::new(ErrorCode::UnknownRoom, format!("no room `{code}`")));
                    continue;
                };
                let (reply, answer) = oneshot::channel();
                if room_tx.send(Command::Join { conn, role, tx: tx.clone(), reply }).is_err() {
                    reply_err(WireError::new(ErrorCode::UnknownRoom, format!("room `{code}` has closed")));
                    continue;
                }
                match answer.await {
                    Ok(Ok(())) => seat = Some(room_tx),
                    Ok(Err(e)) => reply_err(e),
                    Err(_) => reply_err(WireError::new(ErrorCode::UnknownRoom, format!("room `{code}` has closed"))),
                }
            }
            (Some(_), ClientMessage::JoinRoom { .. }) => {
                reply_err(WireError::new(ErrorCode::AlreadySeated, "leave the current room first"))
            }
            (None, _) => reply_err(WireError::new(ErrorCode::NotSeated, "join a room first")),
            (Some(room_tx), msg) => {
                let _ = room_tx.send(Command::Message { conn, msg });
            }
        }
    }
    if let Some(room_tx) = seat {
        let _ = room_tx.send(Command::Leave { conn });
    }
    drop(tx);
    let _ = writer.await;
    debug!(conn, "disconnected");
}
