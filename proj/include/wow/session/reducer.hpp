#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wow/session/command.hpp"

namespace wow {

/// Fresh session holding one empty wall "Wall 1" at version 0.
Result<Session> new_session(const SessionId& id, const std::string& name,
                            int grid_cols = kDefaultGridCols, int grid_rows = kDefaultGridRows);

struct Applied {
  Session session;
  Event event;
};

/// The single state transition function. Pure in (session, command, meta);
/// on failure the input session is untouched and the error is the rejection.
Result<Applied> apply_command(const Session& session, const Command& command,
                              const CommandMeta& meta);

/// Replays a recorded event. Fails if event.seq is not session.version + 1.
Result<Session> apply_event(const Session& session, const Event& event);

Result<std::pair<Session, ContentId>> register_content(const Session& session,
                                                       const ContentDescriptor& descriptor,
                                                       const CommandMeta& meta);

Result<std::pair<Session, Note>> add_note(const Session& session, const ContentId& content,
                                          const std::string& text, const CommandMeta& meta);

std::vector<Note> notes_for_content(const Session& session, const ContentId& content);
std::vector<Note> notes_by_author(const Session& session, const ParticipantId& author);

/// Referential integrity plus every wall invariant. Empty means valid.
std::vector<std::string> audit_session(const Session& session);

}  // namespace wow
