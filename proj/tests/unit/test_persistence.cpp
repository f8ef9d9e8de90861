#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pilu/checkpoint.hpp"
#include "pilu/metrics_log.hpp"

namespace pilu {
namespace fs = std::filesystem;
namespace {

class Scratch : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("pilu_persist_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path dir_;
};

template <typename T>
void expect_bit_identical(const Model<T>& a, const Model<T>& b) {
    const auto pa = a.parameters(), pb = b.parameters();
    ASSERT_EQ(pa.size(), pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        ASSERT_EQ(pa[i]->value.shape(), pb[i]->value.shape());
        EXPECT_EQ(std::memcmp(pa[i]->value.data().data(), pb[i]->value.data().data(), pa[i]->value.size() * sizeof(T)),
                  0)
            << pa[i]->name;
    }
}

using CheckpointTest = Scratch;

TEST_F(CheckpointTest, RoundTripIsBitExact) {
    Rng a = make_stream(1, Stream::Init), b = make_stream(2, Stream::Init);
    const ActivationSpec spec{ActivationKind::PiLU, SharingScheme::NeuronWise};
    auto saved = build_paper_model<float>(10, spec, a);
    saved.parameters()[2]->value[5] = std::nextafter(0.3f, 1.0f);
    auto restored = build_paper_model<float>(10, spec, b);
    save_checkpoint(saved, dir_ / "m.ckpt", R"({"run_id":"x"})");
    EXPECT_EQ(load_checkpoint(restored, dir_ / "m.ckpt"), R"({"run_id":"x"})");
    expect_bit_identical(saved, restored);

    Rng c = make_stream(3, Stream::Init);
    auto d1 = build_paper_model<double>(100, {ActivationKind::DoubleReLU}, c);
    auto d2 = build_paper_model<double>(100, {ActivationKind::DoubleReLU});
    save_checkpoint(d1, dir_ / "d.ckpt");
    load_checkpoint(d2, dir_ / "d.ckpt");
    expect_bit_identical(d1, d2);
}

TEST_F(CheckpointTest, RejectsMismatches) {
    auto pilu = build_paper_model<float>(10, {ActivationKind::PiLU});
    save_checkpoint(pilu, dir_ / "m.ckpt");

    auto relu = build_paper_model<float>(10, {ActivationKind::ReLU});
    EXPECT_THROW(load_checkpoint(relu, dir_ / "m.ckpt"), std::runtime_error);
    auto layer = build_paper_model<float>(10, {ActivationKind::PiLU, SharingScheme::LayerWise});
    EXPECT_THROW(load_checkpoint(layer, dir_ / "m.ckpt"), std::runtime_error);
    auto wide = build_paper_model<double>(10, {ActivationKind::PiLU});
    EXPECT_THROW(load_checkpoint(wide, dir_ / "m.ckpt"), std::runtime_error);
    EXPECT_THROW(load_checkpoint(pilu, dir_ / "missing.ckpt"), std::runtime_error);

    const auto size = fs::file_size(dir_ / "m.ckpt");
    fs::copy_file(dir_ / "m.ckpt", dir_ / "cut.ckpt");
    fs::resize_file(dir_ / "cut.ckpt", size - 3);
    EXPECT_THROW(load_checkpoint(pilu, dir_ / "cut.ckpt"), std::runtime_error);

    std::ofstream(dir_ / "junk.ckpt") << "not a checkpoint";
    EXPECT_THROW(load_checkpoint(pilu, dir_ / "junk.ckpt"), std::runtime_error);
}

RunRecord sample_record() {
    RunRecord r;
    r.info = {"pilu_channel_seed3", 3, ActivationKind::PiLU, SharingScheme::ChannelWise, "cifar10", 36282};
    r.rows.push_back({1, Split::Train, 1.9, 0.31, 0.69});
    r.rows.push_back({1, Split::Val, 2.0 / 3.0, 0.1 + 0.2, 1.0 - (0.1 + 0.2)});
    r.rows.push_back({1, Split::Test, 1.7, 0.35, 0.65});
    r.layer_stats.push_back({1, "act1.pilu", {0.3, 0.5, 2.25}, {1e-5, 3e-4, 0.01}});
    r.complete = true;
    return r;
}

using MetricsLogTest = Scratch;

TEST_F(MetricsLogTest, RoundTripPreservesEveryValue) {
    const auto rec = sample_record();
    {
        MetricsLogWriter w(dir_ / "run.jsonl");
        for (const auto& row : rec.rows) w.write(rec.info, row);
        for (const auto& row : rec.layer_stats) w.write(rec.info, row);
        w.finish(rec);
    }
    EXPECT_TRUE(run_log_complete(dir_ / "run.jsonl"));
    EXPECT_EQ(read_run_log(dir_ / "run.jsonl"), rec);
}

TEST_F(MetricsLogTest, InterruptedRunIsIncomplete) {
    auto rec = sample_record();
    {
        MetricsLogWriter w(dir_ / "run.jsonl");
        w.write(rec.info, rec.rows[0]);
    }
    EXPECT_FALSE(run_log_complete(dir_ / "run.jsonl"));
    EXPECT_FALSE(run_log_complete(dir_ / "absent.jsonl"));
    const auto back = read_run_log(dir_ / "run.jsonl");
    EXPECT_FALSE(back.complete);
    ASSERT_EQ(back.rows.size(), 1u);
    EXPECT_EQ(back.rows[0], rec.rows[0]);
}

TEST_F(MetricsLogTest, DivergedRunKeepsItsEpoch) {
    auto rec = sample_record();
    rec.diverged_epoch = 4;
    rec.complete = false;
    {
        MetricsLogWriter w(dir_ / "run.jsonl");
        w.finish(rec);
    }
    EXPECT_TRUE(run_log_complete(dir_ / "run.jsonl"));
    EXPECT_EQ(read_run_log(dir_ / "run.jsonl").diverged_epoch, 4);
}

TEST_F(MetricsLogTest, MalformedLineThrows) {
    std::ofstream(dir_ / "bad.jsonl") << "{\"record\":\"metrics\"\n";
    EXPECT_THROW(read_run_log(dir_ / "bad.jsonl"), std::runtime_error);
}

TEST_F(MetricsLogTest, ReadsDirectoryInNameOrderAndWritesCsv) {
    auto a = sample_record(), b = sample_record();
    b.info.run_id = "a_first";
    for (const auto* r : {&a, &b}) {
        MetricsLogWriter w(dir_ / (r->info.run_id + ".jsonl"));
        for (const auto& row : r->rows) w.write(r->info, row);
        w.finish(*r);
    }
    std::ofstream(dir_ / "notes.txt") << "ignored";
    const auto all = read_run_logs(dir_);
    ASSERT_EQ(all.size(), 2u);
    EXPECT_EQ(all[0].info.run_id, "a_first");

    write_metrics_csv(all, dir_ / "metrics.csv");
    std::ifstream in(dir_ / "metrics.csv");
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    EXPECT_EQ(header, "run_id,seed,activation,scheme,dataset,epoch,split,loss,accuracy,error");
    EXPECT_EQ(first.substr(0, first.find(",1,train")), "a_first,3,pilu,channel,cifar10");
    std::size_t lines = 2;
    for (std::string l; std::getline(in, l);) ++lines;
    EXPECT_EQ(lines, 7u);
}

}  // namespace
}  // namespace pilu
