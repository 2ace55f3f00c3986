// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sds {

enum class Errc {
  InvalidArgument,
  UnsupportedFormat,
  // wire protocol
  Truncated,
  BadKind,
  MalformedFrame,
  MalformedMessage,
  ConnectionClosed,
  MalformedHello,
  EmptyModelList,
  UnknownWorker,
  UnknownModel,
  NoWorkerForTask,
  WorkerTimeout,
  WorkerError,
  // sessions
  SessionExpired,
  InvalidState,
  // metrics
  EmptyReference,
  EmptyCandidate,
  TooFewSentences,
  EmptyCorpus,
  ZeroDuration,
  IntervalOutOfRange,
  NegativeDuration,
  // gateway
  UnknownSession,
  UnknownTurn,
  InvalidLevel,
  StorageDisabled,
  PrivacyNoticeRequired,
  IoFailure,
  // batch evaluation
  ParseError,
  InvariantViolation,
  MissingAudio,
  SingleChannel,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace sds
