#pragma once

#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mrda/degradation.hpp"
#include "mrda/image.hpp"
#include "mrda/mln.hpp"
#include "mrda/training.hpp"

namespace mrda {

/// BT.601 studio-swing luma: (65.481 R + 128.553 G + 24.966 B + 16) / 255.
ImageTensor rgb_to_y(const ImageTensor& img);

/// Removes `border` pixels from every side.
ImageTensor crop_border(const ImageTensor& img, int border);

/// 10 log10(1 / MSE) on luma after cropping. RGB inputs are converted first.
/// Identical inputs give +infinity.
double psnr(const ImageTensor& a, const ImageTensor& b, int border_crop);

/// Mean SSIM over all positions where an 11x11 Gaussian window (sigma 1.5)
/// fits, C1 = 0.01^2, C2 = 0.03^2, data range 1. RGB inputs are converted to luma.
double ssim(const ImageTensor& a, const ImageTensor& b);

struct MetricRow {
  std::string label;
  nlohmann::json spec;
  std::vector<double> image_psnr;
  std::vector<double> image_ssim;
  double psnr = 0.0;  // means over images
  double ssim = 0.0;
};

struct MetricReport {
  std::string dataset;
  std::string checkpoint_hash;
  int border_crop = 0;
  std::vector<MetricRow> rows;

  double mean_psnr() const;
  double mean_ssim() const;
  void write_csv(const std::filesystem::path& path) const;
  void write_json(const std::filesystem::path& path) const;
};

/// Student super-resolution of a whole LR image.
ImageTensor super_resolve(const StudentModel& student, const ImageTensor& lr);

/// Degrades every image (cropped to a multiple of the scale) under each spec
/// and scores the student's output.
MetricReport evaluate_student(const StudentModel& student, const std::vector<ImageTensor>& hr_images,
                              const std::vector<DegradationSpec>& specs, const std::string& dataset,
                              const std::string& checkpoint_hash, int workers = 1);

/// Short group label for a degradation, e.g. "iso_2.000" or "aniso_1.000_0.500_0.785_n10".
std::string degradation_label(const DegradationSpec& spec);

struct IdrRow {
  std::string image_id;
  std::string label;
  nlohmann::json spec;
  std::vector<double> d;
};

/// One row per (image, degradation); rows ordered by degradation, then image.
std::vector<IdrRow> export_idr_student(const DenModel& den_s, const std::vector<ImageTensor>& hr_images,
                                       const std::vector<DegradationSpec>& grid);
/// Teacher path: adapts the MLN on each (LR, HR) pair, then applies DEN_T.
std::vector<IdrRow> export_idr_teacher(const TrainConfig& c, const MlnModel& mln, const DenModel& den_t,
                                       const std::vector<ImageTensor>& hr_images,
                                       const std::vector<DegradationSpec>& grid);

void write_idr_jsonl(const std::filesystem::path& path, const std::vector<IdrRow>& rows);
std::vector<IdrRow> read_idr_jsonl(const std::filesystem::path& path);

/// Mean silhouette coefficient (Euclidean) grouping rows by label. Needs at
/// least two labels with at least two rows each.
double separability_score(const std::vector<IdrRow>& rows);
double separability_score(const std::vector<std::vector<double>>& points, const std::vector<std::string>& labels);
double separability_score(const std::filesystem::path& export_file);

/// Mean query PSNR (luma, border = scale) after k = 0..max_steps inner steps,
/// averaged over tasks.
std::vector<std::pair<int, double>> adaptation_curve(const nn::ParamSet& params, int scale,
                                                     const std::vector<TaskBatch>& tasks, int max_steps,
                                                     double alpha);

}  // namespace mrda
