//! Wire protocol, session logs, and the client state stream.

pub mod bridge;
pub mod ingest;
pub mod osc;
pub mod session;

pub use bridge::{BridgeServer, ClientFrame, ServerFrame, StateBroadcaster, StateFrame, Subscription};
pub use ingest::{
    event_message, ingest_pose, params_message, pose_message, validate_pose, InboundPose, IngestError, OscSender,
    UdpIngress, EVENT_ADDRESS, PARAMS_ADDRESS, POSE_ADDRESS,
};
pub use osc::{decode_osc, encode_osc, OscArg, OscError, OscMessage};
pub use session::{
    read_session, read_session_from, write_session, write_session_to, SessionError, SessionHeader, SessionLog,
    SessionRecord, SessionWriter, SESSION_VERSION,
};
