//! Live inference over WebSocket.
//!
//! One task owns the simulation. It ticks every 33 ms, applies queued
//! operator controls, advances `base rate × time scale` steps, and
//! broadcasts the latest frame to every client; intermediate frames of a
//! tick are coalesced away. Controls only ever run between steps.

pub mod protocol;

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{broadcast, mpsc};
use tokio_tungstenite::tungstenite::Message;
use windfarm_core::experiments::{load_predictor, Controller, ExperimentConfig, InferenceSession};
use windfarm_core::{Error, Result};

pub use protocol::{Control, ErrorFrame, Frame, Light, TurbineFrame, PROTOCOL_VERSION};

pub const DEFAULT_PORT: u16 = 8734;
/// Simulation steps per second at time scale 1.
pub const BASE_STEPS_PER_SECOND: f64 = 10.0;
pub const TICK: Duration = Duration::from_millis(33);

pub struct ServeOptions {
    pub config: ExperimentConfig,
    pub controller: Controller,
    pub seed: u64,
    pub port: u16,
}

/// Simulation state owned by the server loop.
pub struct Simulation {
    session: InferenceSession,
    paused: bool,
    time_scale: f64,
    /// Fractional steps carried between ticks.
    step_debt: f64,
}

impl Simulation {
    /// Same session `infer` would run for repeat 0 of `seed`.
    pub fn new(cfg: &ExperimentConfig, controller: Controller, seed: u64) -> Result<Self> {
        let session =
            InferenceSession::for_repeat(cfg, cfg.layout.build()?, load_predictor(cfg)?, controller, seed, 0)?;
        Ok(Self {
            session,
            paused: false,
            time_scale: 1.0,
            step_debt: 0.0,
        })
    }

    pub fn session(&self) -> &InferenceSession {
        &self.session
    }

    pub fn paused(&self) -> bool {
        self.paused
    }

    pub fn time_scale(&self) -> f64 {
        self.time_scale
    }

    pub fn frame(&self) -> Frame {
        Frame::capture(&self.session, self.paused, self.time_scale)
    }

    pub fn apply(&mut self, control: &Control) -> Result<()> {
        match *control {
            Control::SetTimeScale { value, .. } => self.time_scale = value,
            Control::SetWindDirection { value, .. } => {
                self.session.env_mut().farm_mut().wind_mut().pin(value);
            }
            Control::ReleaseWind { .. } => self.session.env_mut().farm_mut().wind_mut().release(),
            Control::Pause { .. } => self.paused = true,
            Control::Resume { .. } => self.paused = false,
            Control::Reset { .. } => {
                self.session.reset_episode()?;
                self.step_debt = 0.0;
            }
        }
        Ok(())
    }

    pub fn step(&mut self) -> Result<()> {
        self.session.step().map(|_| ())
    }

    /// Advances by the steps due after `elapsed`; returns how many ran.
    pub fn tick(&mut self, elapsed: Duration) -> Result<u64> {
        if self.paused {
            return Ok(0);
        }
        self.step_debt += BASE_STEPS_PER_SECOND * self.time_scale * elapsed.as_secs_f64();
        let due = self.step_debt.floor();
        self.step_debt -= due;
        for _ in 0..due as u64 {
            self.step()?;
        }
        Ok(due as u64)
    }
}

struct Inbound {
    text: String,
    reply: mpsc::UnboundedSender<String>,
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("protocol types serialize")
}

/// Binds `addr` and serves until the simulation fails. Returns the bound
/// address and the server task.
pub async fn start(opts: ServeOptions, addr: SocketAddr) -> Result<(SocketAddr, tokio::task::JoinHandle<Result<()>>)> {
    let sim = Simulation::new(&opts.config, opts.controller, opts.seed)?;
    let listener = TcpListener::bind(addr)
        .await
        .map_err(|e| Error::io(addr.to_string(), e))?;
    let local = listener.local_addr().map_err(|e| Error::io(addr.to_string(), e))?;
    let handle = tokio::spawn(serve(sim, listener));
    Ok((local, handle))
}

async fn serve(mut sim: Simulation, listener: TcpListener) -> Result<()> {
    let (frames_tx, _) = broadcast::channel::<Arc<String>>(64);
    let (control_tx, mut control_rx) = mpsc::unbounded_channel::<Inbound>();
    let latest = Arc::new(std::sync::Mutex::new(Arc::new(to_json(&sim.frame()))));

    let accept_frames = frames_tx.clone();
    let accept_latest = latest.clone();
    tokio::spawn(async move {
        while let Ok((stream, peer)) = listener.accept().await {
            let frames = accept_frames.subscribe();
            let current = accept_latest.lock().expect("frame lock").clone();
            tokio::spawn(client(stream, peer, frames, current, control_tx.clone()));
        }
    });

    let mut interval = tokio::time::interval(TICK);
    interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    let mut last = tokio::time::Instant::now();
    loop {
        interval.tick().await;
        let now = tokio::time::Instant::now();
        let elapsed = now - last;
        last = now;

        let mut changed = false;
        while let Ok(msg) = control_rx.try_recv() {
            match Control::parse(&msg.text) {
                Ok(c) => {
                    sim.apply(&c)?;
                    changed = true;
                }
                Err(reason) => {
                    let _ = msg.reply.send(to_json(&ErrorFrame::new(reason)));
                }
            }
        }
        if sim.tick(elapsed)? > 0 || changed {
            let frame = Arc::new(to_json(&sim.frame()));
            *latest.lock().expect("frame lock") = frame.clone();
            // no receivers is fine
            let _ = frames_tx.send(frame);
        }
    }
}

async fn client(
    stream: TcpStream,
    peer: SocketAddr,
    mut frames: broadcast::Receiver<Arc<String>>,
    current: Arc<String>,
    controls: mpsc::UnboundedSender<Inbound>,
) {
    let ws = match tokio_tungstenite::accept_async(stream).await {
        Ok(ws) => ws,
        Err(e) => {
            log::warn!("handshake with {peer} failed: {e}");
            return;
        }
    };
    log::info!("client {peer} connected");
    let (mut sink, mut source) = ws.split();
    let (reply_tx, mut reply_rx) = mpsc::unbounded_channel::<String>();
    if sink.send(Message::text(current.as_str())).await.is_err() {
        return;
    }
    loop {
        tokio::select! {
            frame = frames.recv() => match frame {
                Ok(f) => {
                    if sink.send(Message::text(f.as_str())).await.is_err() {
                        break;
                    }
                }
                // a slow client skips frames; the next one carries full state
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => break,
            },
            reply = reply_rx.recv() => {
                if let Some(text) = reply {
                    if sink.send(Message::text(text)).await.is_err() {
                        break;
                    }
                }
            }
            incoming = source.next() => match incoming {
                Some(Ok(Message::Text(text))) => {
                    let msg = Inbound { text: text.to_string(), reply: reply_tx.clone() };
                    if controls.send(msg).is_err() {
                        break;
                    }
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
        }
    }
    log::info!("client {peer} disconnected");
}

/// Runs the server on `0.0.0.0:port` until it fails.
pub fn run_blocking(opts: ServeOptions) -> Result<()> {
    let runtime = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .map_err(|e| Error::io("tokio runtime", e))?;
    runtime.block_on(async move {
        let addr = SocketAddr::from(([0, 0, 0, 0], opts.port));
        let (bound, handle) = start(opts, addr).await?;
        log::info!("serving on ws://{bound}");
        handle
            .await
            .map_err(|e| Error::Contract(format!("server task ended: {e}")))?
    })
}
