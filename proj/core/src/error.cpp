// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include "sds/error.hpp"

namespace sds {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::Truncated: return "Truncated";
    case Errc::BadKind: return "BadKind";
    case Errc::MalformedFrame: return "MalformedFrame";
    case Errc::MalformedMessage: return "MalformedMessage";
    case Errc::ConnectionClosed: return "ConnectionClosed";
    case Errc::MalformedHello: return "MalformedHello";
    case Errc::EmptyModelList: return "EmptyModelList";
    case Errc::UnknownWorker: return "UnknownWorker";
    case Errc::UnknownModel: return "UnknownModel";
    case Errc::NoWorkerForTask: return "NoWorkerForTask";
    case Errc::WorkerTimeout: return "WorkerTimeout";
    case Errc::WorkerError: return "WorkerError";
    case Errc::SessionExpired: return "SessionExpired";
    case Errc::InvalidState: return "InvalidState";
    case Errc::EmptyReference: return "EmptyReference";
    case Errc::EmptyCandidate: return "EmptyCandidate";
    case Errc::TooFewSentences: return "TooFewSentences";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::ZeroDuration: return "ZeroDuration";
    case Errc::IntervalOutOfRange: return "IntervalOutOfRange";
    case Errc::NegativeDuration: return "NegativeDuration";
    case Errc::UnknownSession: return "UnknownSession";
    case Errc::UnknownTurn: return "UnknownTurn";
    case Errc::InvalidLevel: return "InvalidLevel";
    case Errc::StorageDisabled: return "StorageDisabled";
    case Errc::PrivacyNoticeRequired: return "PrivacyNoticeRequired";
    case Errc::IoFailure: return "IoFailure";
    case Errc::ParseError: return "ParseError";
    case Errc::InvariantViolation: return "InvariantViolation";
    case Errc::MissingAudio: return "MissingAudio";
    case Errc::SingleChannel: return "SingleChannel";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace sds
