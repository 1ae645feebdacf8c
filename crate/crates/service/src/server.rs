use std::io;
use std::net::SocketAddr;
use std::sync::Arc;

use futures_util::{SinkExt, StreamExt};
use tokio::net::{TcpListener, TcpStream, ToSocketAddrs};
use tokio::sync::mpsc;
use tokio_tungstenite::tungstenite::Message;
use voxelskip::Volume;

use crate::session::{coalesce, Response, Session, SessionConfig};

enum Incoming {
    Text(String),
    Binary,
}

impl AsRef<str> for Incoming {
    fn as_ref(&self) -> &str {
        match self {
            Incoming::Text(t) => t,
            Incoming::Binary => "",
        }
    }
}

pub async fn serve(addr: impl ToSocketAddrs, volume: Arc<Volume>, cfg: SessionConfig) -> io::Result<()> {
    serve_listener(TcpListener::bind(addr).await?, volume, cfg).await
}

/// Accepts connections forever, one session per connection.
pub async fn serve_listener(listener: TcpListener, volume: Arc<Volume>, cfg: SessionConfig) -> io::Result<()> {
    loop {
        let (stream, peer) = listener.accept().await?;
        let (volume, cfg) = (volume.clone(), cfg.clone());
        tokio::spawn(async move {
            if let Err(e) = connection(stream, volume, cfg).await {
                eprintln!("session {peer}: {e}");
            }
        });
    }
}

async fn connection(
    stream: TcpStream,
    volume: Arc<Volume>,
    cfg: SessionConfig,
) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let peer: Option<SocketAddr> = stream.peer_addr().ok();
    let ws = tokio_tungstenite::accept_async(stream).await?;
    let (mut sink, mut source) = ws.split();

    // Reading runs ahead of processing so that queued tf edits can be merged.
    let (tx, mut rx) = mpsc::unbounded_channel();
    let reader = tokio::spawn(async move {
        while let Some(msg) = source.next().await {
            let incoming = match msg {
                Ok(Message::Text(t)) => Incoming::Text(t.to_string()),
                Ok(Message::Binary(_)) => Incoming::Binary,
                Ok(Message::Close(_)) | Err(_) => break,
                Ok(_) => continue,
            };
            if tx.send(incoming).is_err() {
                break;
            }
        }
    });

    let (mut session, greeting) = tokio::task::spawn_blocking(move || {
        let mut s = Session::new(volume, cfg)?;
        let g = s.greeting();
        Ok::<_, voxelskip::Error>((s, g))
    })
    .await??;
    send_all(&mut sink, greeting).await?;

    while let Some(first) = rx.recv().await {
        let mut batch = vec![first];
        while let Ok(more) = rx.try_recv() {
            batch.push(more);
        }
        for incoming in coalesce(batch) {
            let (s, responses) = tokio::task::spawn_blocking(move || {
                let mut s = session;
                let r = match &incoming {
                    Incoming::Text(t) => s.handle_message(t),
                    Incoming::Binary => s.handle_binary(),
                };
                (s, r)
            })
            .await?;
            session = s;
            send_all(&mut sink, responses).await?;
        }
    }
    reader.abort();
    let _ = sink.close().await;
    if let Some(peer) = peer {
        eprintln!("session {peer} closed");
    }
    Ok(())
}

async fn send_all<S>(sink: &mut S, responses: Vec<Response>) -> Result<(), S::Error>
where
    S: futures_util::Sink<Message> + Unpin,
{
    for r in responses {
        let msg = match r {
            Response::Text(t) => Message::text(t),
            Response::Binary(b) => Message::binary(b),
        };
        sink.send(msg).await?;
    }
    Ok(())
}
