// Copyright 2026 The sds-harness Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <future>
#include <random>
#include <thread>

#include <gtest/gtest.h>

#include "sds/error.hpp"
#include "sds/protocol/connection.hpp"
#include "sds/protocol/frame.hpp"
#include "sds/protocol/message.hpp"
#include "sds/protocol/mock_workers.hpp"
#include "sds/protocol/registry.hpp"
#include "sds/protocol/transport.hpp"
#include "sds/protocol/worker.hpp"
#include "test_support.hpp"

namespace sds::protocol {
namespace {

using namespace std::chrono_literals;

std::vector<std::byte> bytes_of(std::string_view s) {
  std::vector<std::byte> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = static_cast<std::byte>(s[i]);
  return out;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no sds::Error thrown";
  return Errc::InvalidArgument;
}

TEST(Frame, PingHeaderBytes) {
  const auto payload = bytes_of(R"({"op":"ping"})");
  ASSERT_EQ(payload.size(), 13u);
  const auto enc = encode_frame(FrameKind::Header, payload);
  ASSERT_EQ(enc.size(), 18u);
  EXPECT_EQ(enc[0], std::byte{0x0E});
  EXPECT_EQ(enc[1], std::byte{0});
  EXPECT_EQ(enc[2], std::byte{0});
  EXPECT_EQ(enc[3], std::byte{0});
  EXPECT_EQ(enc[4], std::byte{0});
  EXPECT_EQ(enc[5], std::byte{'{'});
}

TEST(Frame, MinimalAudioFrame) {
  const auto enc = encode_frame(FrameKind::Audio, {});
  const std::vector<std::byte> want{std::byte{1}, std::byte{0}, std::byte{0}, std::byte{0}, std::byte{1}};
  EXPECT_EQ(enc, want);
  const auto dec = decode_frame(enc);
  EXPECT_EQ(dec.consumed, 5u);
  EXPECT_EQ(dec.frame.kind, FrameKind::Audio);
  EXPECT_TRUE(dec.frame.payload.empty());
}

TEST(Frame, MebibyteRoundTrip) {
  std::mt19937 rng(1);
  std::vector<std::byte> payload(1 << 20);
  for (auto& b : payload) b = static_cast<std::byte>(rng());
  const auto dec = decode_frame(encode_frame(FrameKind::Audio, payload));
  EXPECT_EQ(dec.frame.payload, payload);
  EXPECT_EQ(dec.consumed, payload.size() + 5);
}

TEST(Frame, DecodeConsumesExactlyOneFrame) {
  auto a = encode_frame(FrameKind::Header, bytes_of("{}"));
  const auto b = encode_frame(FrameKind::Audio, bytes_of("xy"));
  a.insert(a.end(), b.begin(), b.end());
  const auto first = decode_frame(a);
  EXPECT_EQ(first.consumed, 7u);
  const auto second = decode_frame(std::span(a).subspan(first.consumed));
  EXPECT_EQ(second.frame.kind, FrameKind::Audio);
}

TEST(Frame, RejectsTruncatedAndBadKind) {
  auto enc = encode_frame(FrameKind::Header, bytes_of("{\"a\":1}"));
  EXPECT_EQ(code_of([&] { decode_frame(std::span(enc).first(3)); }), Errc::Truncated);
  EXPECT_EQ(code_of([&] { decode_frame(std::span(enc).first(enc.size() - 1)); }), Errc::Truncated);
  enc[4] = std::byte{2};
  EXPECT_EQ(code_of([&] { decode_frame(enc); }), Errc::BadKind);
  const std::vector<std::byte> zero(5, std::byte{0});
  EXPECT_EQ(code_of([&] { decode_frame(zero); }), Errc::MalformedFrame);
}

TEST(Frame, FuzzRoundTripAndMutations) {
  std::mt19937 rng(2024);
  for (int i = 0; i < 10000; ++i) {
    std::vector<std::byte> payload(rng() % 64);
    for (auto& b : payload) b = static_cast<std::byte>(rng());
    const auto kind = rng() % 2 ? FrameKind::Audio : FrameKind::Header;
    const auto enc = encode_frame(kind, payload);
    const auto dec = decode_frame(enc);
    ASSERT_EQ(dec.frame.kind, kind);
    ASSERT_EQ(dec.frame.payload, payload);
    ASSERT_EQ(dec.consumed, enc.size());

    auto cut = std::span(enc).first(rng() % enc.size());
    EXPECT_THROW(decode_frame(cut), Error);
    auto mutated = enc;
    mutated[4] = static_cast<std::byte>(2 + rng() % 254);
    EXPECT_THROW(decode_frame(mutated), Error);
  }
}

TEST(FrameReader, ReassemblesAcrossArbitraryChunks) {
  std::mt19937 rng(5);
  std::vector<Frame> sent;
  std::vector<std::byte> wire;
  for (int i = 0; i < 200; ++i) {
    Frame f{rng() % 2 ? FrameKind::Audio : FrameKind::Header, std::vector<std::byte>(rng() % 100)};
    for (auto& b : f.payload) b = static_cast<std::byte>(rng());
    const auto enc = encode_frame(f.kind, f.payload);
    wire.insert(wire.end(), enc.begin(), enc.end());
    sent.push_back(std::move(f));
  }
  FrameReader reader;
  std::vector<Frame> got;
  for (std::size_t i = 0; i < wire.size();) {
    const auto n = std::min<std::size_t>(1 + rng() % 37, wire.size() - i);
    reader.feed(std::span(wire).subspan(i, n));
    i += n;
    while (auto f = reader.next()) got.push_back(std::move(*f));
  }
  EXPECT_EQ(got, sent);
  EXPECT_EQ(reader.buffered(), 0u);
}

TEST(FrameReader, RejectsOversizedAndBadKind) {
  FrameReader small(8);
  small.feed(encode_frame(FrameKind::Header, std::vector<std::byte>(9)));
  EXPECT_THROW(small.next(), Error);
  FrameReader reader;
  const std::vector<std::byte> bad{std::byte{1}, std::byte{0}, std::byte{0}, std::byte{0}, std::byte{9}};
  reader.feed(bad);
  EXPECT_THROW(reader.next(), Error);
}

TEST(Message, AudioRoundTrip) {
  Message m;
  m.header = {{"op", "infer"}, {"request_id", 7}};
  m.audio = audio::AudioBuffer{{1, -2, 3}, {8000, 1}};
  const auto wire = encode_message(m);
  FrameReader reader;
  reader.feed(wire);
  MessageAssembler assembler;
  std::optional<Message> out;
  while (auto f = reader.next()) {
    if (auto done = assembler.push(std::move(*f))) out = std::move(done);
  }
  ASSERT_TRUE(out);
  EXPECT_EQ(out->op(), "infer");
  EXPECT_EQ(out->request_id(), 7u);
  ASSERT_TRUE(out->audio);
  EXPECT_EQ(out->audio->samples, m.audio->samples);
  EXPECT_EQ(out->audio->format.sample_rate_hz, 8000);
}

TEST(Message, AssemblerRejectsProtocolViolations) {
  MessageAssembler a;
  EXPECT_EQ(code_of([&] { a.push({FrameKind::Audio, std::vector<std::byte>(2)}); }), Errc::MalformedMessage);
  MessageAssembler b;
  EXPECT_EQ(code_of([&] { b.push({FrameKind::Header, bytes_of("[1,2]")}); }), Errc::MalformedMessage);
  MessageAssembler c;
  EXPECT_EQ(code_of([&] { c.push({FrameKind::Header, bytes_of("{nope")}); }), Errc::MalformedMessage);
  MessageAssembler d;
  d.push({FrameKind::Header, bytes_of(R"({"op":"x","audio":{"sample_rate_hz":16000,"samples":2}})")});
  EXPECT_EQ(code_of([&] { d.push({FrameKind::Audio, std::vector<std::byte>(2)}); }), Errc::MalformedMessage);
}

TEST(Hello, ParseRules) {
  const auto d = parse_hello({{"op", "hello"}, {"worker_id", "w"}, {"task", "asr"}, {"models", {"m1", "m2"}}});
  EXPECT_EQ(d.task, Task::Asr);
  EXPECT_EQ(d.models.size(), 2u);
  EXPECT_FALSE(d.loaded_model);
  EXPECT_EQ(code_of([] { parse_hello({{"op", "hello"}, {"worker_id", "j"}, {"task", "judge"},
                                      {"models", {"x"}}, {"judge_metrics", nlohmann::json::array()}}); }),
            Errc::EmptyModelList);
  EXPECT_EQ(code_of([] { parse_hello({{"op", "hello"}, {"worker_id", "w"}, {"task", "asr"},
                                      {"models", nlohmann::json::array()}}); }),
            Errc::EmptyModelList);
  EXPECT_EQ(code_of([] { parse_hello({{"op", "hello"}, {"task", "asr"}, {"models", {"m"}}}); }),
            Errc::MalformedHello);
  EXPECT_EQ(code_of([] { parse_hello({{"op", "hello"}, {"worker_id", "w"}, {"task", "vision"},
                                      {"models", {"m"}}}); }),
            Errc::MalformedHello);
}

std::shared_ptr<mock::MockHandler> asr_mock(const std::string& id, std::vector<std::string> models,
                                            std::shared_ptr<mock::EventLog> log) {
  return std::make_shared<mock::EchoAsr>(id, std::move(models), std::move(log));
}

TEST(Registry, DuplicateWorkerIdSupersedes) {
  WorkerRegistry registry(2s);
  auto log = std::make_shared<mock::EventLog>();
  InProcessWorker first(registry, asr_mock("w", {"m1"}, log));
  EXPECT_EQ(registry.size(), 1u);
  InProcessWorker second(registry, asr_mock("w", {"m2"}, log));
  EXPECT_EQ(registry.size(), 1u);
  const auto d = registry.find("w");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->models, std::vector<std::string>{"m2"});
  registry.load_model("w", "m2");
  EXPECT_EQ(registry.loaded_for(Task::Asr)->worker_id, "w");
}

TEST(Registry, LoadIsIdempotent) {
  WorkerRegistry registry(2s);
  auto handler = asr_mock("a", {"m1"}, nullptr);
  InProcessWorker w(registry, handler);
  registry.load_model("a", "m1");
  registry.load_model("a", "m1");
  EXPECT_EQ(handler->load_count(), 1);
  EXPECT_EQ(registry.find("a")->loaded_model, "m1");
}

TEST(Registry, SwitchUnloadsPreviousWorkerFirst) {
  WorkerRegistry registry(2s);
  auto log = std::make_shared<mock::EventLog>();
  InProcessWorker a(registry, asr_mock("A", {"m1"}, log));
  InProcessWorker b(registry, asr_mock("B", {"m3"}, log));
  registry.load_model("A", "m1");
  log->clear();
  EXPECT_EQ(registry.select_model(Task::Asr, "m3"), "B");
  EXPECT_EQ(log->snapshot(), (std::vector<std::string>{"A:unload", "B:load:m3"}));
  EXPECT_TRUE(registry.audit().empty());
  EXPECT_FALSE(registry.find("A")->loaded_model);
}

TEST(Registry, RandomSwitchSequencesKeepOneModelPerTask) {
  WorkerRegistry registry(2s);
  mock::MockWorkerSet mocks(registry);
  InProcessWorker extra_asr(registry, asr_mock("asr-2", {"m-a", "m-b"}, nullptr));
  InProcessWorker extra_llm(registry, std::make_shared<mock::TemplateLlm>("llm-2", std::vector<std::string>{"big"}));
  const std::vector<std::pair<Task, std::string>> choices{
      {Task::Asr, "echo-asr"}, {Task::Asr, "m-a"}, {Task::Asr, "m-b"},
      {Task::Llm, "template-llm"}, {Task::Llm, "big"}, {Task::Tts, "tone-tts"}};
  std::mt19937 rng(9);
  for (int i = 0; i < 60; ++i) {
    const auto& [task, model] = choices[rng() % choices.size()];
    registry.select_model(task, model);
    ASSERT_TRUE(registry.audit().empty());
    ASSERT_EQ(registry.loaded_for(task)->loaded_model, model);
  }
}

TEST(Registry, ErrorsForMissingThings) {
  WorkerRegistry registry(2s);
  mock::MockWorkerSet mocks(registry, {.asr = true, .llm = false, .tts = false, .e2e = false,
                                       .quality_judge = false, .transcript_judge = false});
  EXPECT_EQ(code_of([&] { registry.select_model(Task::E2e, "mock-e2e"); }), Errc::NoWorkerForTask);
  EXPECT_EQ(code_of([&] { registry.select_model(Task::Asr, "nope"); }), Errc::UnknownModel);
  EXPECT_EQ(code_of([&] { registry.load_model("ghost", "x"); }), Errc::UnknownWorker);
  EXPECT_EQ(code_of([&] { registry.dispatch_infer(Task::Asr, {}, std::nullopt); }), Errc::NoWorkerForTask);
}

TEST(Registry, SlowLoadTimesOut) {
  WorkerRegistry registry(100ms);
  auto handler = asr_mock("slow", {"m"}, nullptr);
  handler->set_load_delay(600ms);
  InProcessWorker w(registry, handler);
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_EQ(code_of([&] { registry.load_model("slow", "m"); }), Errc::WorkerTimeout);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 500ms);
}

TEST(Registry, WorkerErrorIsVerbatim) {
  test::MockHarness h;
  h.registry.select_model(Task::Llm, "template-llm");
  h.mocks.handler("mock-llm")->fail_next_infer("model exploded: CUDA OOM");
  try {
    h.registry.dispatch_infer(Task::Llm, {{"text", "hi"}}, std::nullopt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::WorkerError);
    EXPECT_NE(std::string(e.what()).find("model exploded: CUDA OOM"), std::string::npos);
  }
  const auto ok = h.registry.dispatch_infer(Task::Llm, {{"text", "hi"}}, std::nullopt);
  EXPECT_EQ(ok.body["text"], "echo: hi");
}

TEST(Registry, DisconnectRemovesWorker) {
  test::MockHarness h;
  const auto before = h.registry.size();
  h.mocks.worker("mock-tts")->disconnect();
  for (int i = 0; i < 100 && h.registry.size() == before; ++i) std::this_thread::sleep_for(10ms);
  EXPECT_EQ(h.registry.size(), before - 1);
  EXPECT_FALSE(h.registry.find("mock-tts"));
}

TEST(MockContracts, EchoAsr) {
  test::MockHarness h;
  h.registry.select_model(Task::Asr, "echo-asr");
  const auto r = h.registry.dispatch_infer(Task::Asr, {}, audio::AudioBuffer{test::speech(1.0), {16000, 1}});
  EXPECT_EQ(r.body["text"], "mock transcript 1.00s");
  EXPECT_GT(r.latency_ms, 0.0);
  EXPECT_EQ(r.worker_id, "mock-asr");
}

TEST(MockContracts, TemplateLlm) {
  test::MockHarness h;
  h.registry.select_model(Task::Llm, "template-llm");
  const auto r = h.registry.dispatch_infer(Task::Llm, {{"text", "hello there"}}, std::nullopt);
  EXPECT_EQ(r.body["text"], "echo: hello there");
}

TEST(MockContracts, ToneLengthRule) {
  EXPECT_DOUBLE_EQ(mock::tone_seconds_for(""), 0.0);
  EXPECT_DOUBLE_EQ(mock::tone_seconds_for("0123456789"), 0.5);
  EXPECT_DOUBLE_EQ(mock::tone_seconds_for("0123456789a"), 1.0);
  const std::string reply = "echo: mock transcript 1.00s";
  ASSERT_EQ(reply.size(), 27u);
  EXPECT_DOUBLE_EQ(mock::tone_seconds_for(reply), 1.5);

  test::MockHarness h;
  h.registry.select_model(Task::Tts, "tone-tts");
  const auto r = h.registry.dispatch_infer(Task::Tts, {{"text", reply}}, std::nullopt);
  ASSERT_TRUE(r.audio);
  EXPECT_EQ(r.audio->format.sample_rate_hz, 16000);
  EXPECT_EQ(r.audio->samples.size(), 24000u);
  // Zero crossings of a 440 Hz sine: about 880 per second.
  int crossings = 0;
  for (std::size_t i = 1; i < r.audio->samples.size(); ++i) {
    if ((r.audio->samples[i - 1] < 0) != (r.audio->samples[i] < 0)) ++crossings;
  }
  EXPECT_NEAR(crossings / 1.5, 880.0, 4.0);
}

TEST(MockContracts, E2eAndJudges) {
  test::MockHarness h;
  h.registry.select_model(Task::E2e, "mock-e2e");
  const auto e = h.registry.dispatch_infer(Task::E2e, {}, audio::AudioBuffer{test::speech(0.5), {16000, 1}});
  EXPECT_EQ(e.body["text"], "mock e2e reply to 0.50s");
  ASSERT_TRUE(e.audio);
  EXPECT_FALSE(e.audio->empty());

  const auto j = h.registry.dispatch_to("mockq", {{"metric", "utmos"}}, std::nullopt);
  EXPECT_EQ(j.body["metric"], "utmos");
  EXPECT_DOUBLE_EQ(j.body["value"].get<double>(), 4.0);
  EXPECT_EQ(h.registry.judges_for("utmos"), std::vector<std::string>{"mockq"});
  EXPECT_EQ(h.registry.judges_for("transcript"), std::vector<std::string>{"mock-asr-judge"});
  EXPECT_TRUE(h.registry.judges_for("nonexistent").empty());
}

// A hand-driven worker end: answers requests in reverse order.
TEST(Connection, OutOfOrderResponsesAreMatchedById) {
  auto [harness_end, worker_end] = make_pipe();
  WorkerConnection conn(std::move(harness_end));
  auto hello = conn.start([] {});
  MessageStream worker(*worker_end);
  worker.write(Message{Hello{"w", Task::Llm, {"m"}, {}}.to_json(), {}});
  ASSERT_EQ(hello.wait_for(2s), std::future_status::ready);

  std::uint64_t id1 = 0, id2 = 0;
  auto f1 = conn.send({{"op", "infer"}, {"body", {{"n", 1}}}}, std::nullopt, &id1);
  auto f2 = conn.send({{"op", "infer"}, {"body", {{"n", 2}}}}, std::nullopt, &id2);
  EXPECT_LT(id1, id2);
  const auto r1 = worker.read();
  const auto r2 = worker.read();
  ASSERT_TRUE(r1 && r2);
  worker.write(Message{{{"op", "result"}, {"request_id", *r2->request_id()}, {"body", {{"echo", 2}}}}, {}});
  worker.write(Message{{{"op", "result"}, {"request_id", *r1->request_id()}, {"body", {{"echo", 1}}}}, {}});
  EXPECT_EQ(f1.get().message.header["body"]["echo"], 1);
  EXPECT_EQ(f2.get().message.header["body"]["echo"], 2);
  conn.close();
}

TEST(Connection, RequestCarriesDeadline) {
  auto [harness_end, worker_end] = make_pipe();
  WorkerConnection conn(std::move(harness_end));
  auto hello = conn.start([] {});
  MessageStream worker(*worker_end);
  worker.write(Message{Hello{"w", Task::Llm, {"m"}, {}}.to_json(), {}});
  hello.get();
  auto reply = std::async(std::launch::async, [&] { return conn.call({{"op", "ping"}}, std::nullopt, 1500ms); });
  const auto req = worker.read();
  ASSERT_TRUE(req);
  EXPECT_EQ(req->header["deadline_ms"], 1500);
  worker.write(Message{{{"op", "pong"}, {"request_id", *req->request_id()}}, {}});
  EXPECT_EQ(reply.get().message.op(), "pong");
  conn.close();
}

TEST(Connection, PartialResultsDoNotCompleteRequest) {
  auto [harness_end, worker_end] = make_pipe();
  WorkerConnection conn(std::move(harness_end));
  auto hello = conn.start([] {});
  MessageStream worker(*worker_end);
  worker.write(Message{Hello{"w", Task::Asr, {"m"}, {}}.to_json(), {}});
  hello.get();
  auto f = conn.send({{"op", "infer"}}, std::nullopt);
  const auto req = worker.read();
  ASSERT_TRUE(req);
  const auto id = *req->request_id();
  worker.write(Message{{{"op", "result"}, {"request_id", id}, {"partial", true}, {"body", {{"text", "hel"}}}}, {}});
  EXPECT_EQ(f.wait_for(100ms), std::future_status::timeout);
  worker.write(Message{{{"op", "result"}, {"request_id", id}, {"body", {{"text", "hello"}}}}, {}});
  EXPECT_EQ(f.get().message.header["body"]["text"], "hello");
  EXPECT_EQ(conn.partial_responses(), 1u);
  conn.close();
}

TEST(Tcp, WorkerAttachesOverSocket) {
  auto registry = std::make_unique<WorkerRegistry>(2s);
  WorkerListener listener(*registry, 0);
  auto handler = std::make_shared<mock::TemplateLlm>("tcp-llm", std::vector<std::string>{"template-llm"});
  std::thread worker([&] {
    auto transport = tcp_connect("127.0.0.1", listener.port());
    serve_worker(*transport, *handler);
  });
  ASSERT_TRUE(registry->wait_for_workers(1, 5s));
  registry->select_model(Task::Llm, "template-llm");
  const auto r = registry->dispatch_infer(Task::Llm, {{"text", "over tcp"}}, std::nullopt);
  EXPECT_EQ(r.body["text"], "echo: over tcp");
  EXPECT_GE(registry->ping("tcp-llm"), 0.0);
  listener.stop();
  // Closing the harness side ends serve_worker.
  registry.reset();
  worker.join();
}

}  // namespace
}  // namespace sds::protocol
