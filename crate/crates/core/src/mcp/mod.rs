//! MCP tool servers: JSON-RPC over streamable HTTP at `/mcp`.

pub mod client;
pub mod schema;
pub mod server;
pub mod tools;

pub use client::{McpClient, McpError};
pub use schema::{ObjectSchema, PropertySchema, ScalarType, TextContent, ToolDescriptor, ToolResult};
pub use server::{McpServer, McpSession, SESSION_HEADER, SUPPORTED_VERSIONS};
pub use tools::{ServerKind, ToolBackend, ToolExecutor};
