#include "hybridzoom/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <system_error>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace hz {

namespace {

std::filesystem::path temp_sibling(const std::filesystem::path& path) {
  // Keep the extension so the encoder picks the right format.
  auto tmp = path;
  tmp.replace_filename("." + path.stem().string() + ".partial" +
                       path.extension().string());
  return tmp;
}

void commit(const std::filesystem::path& tmp, const std::filesystem::path& dst) {
  std::error_code ec;
  std::filesystem::rename(tmp, dst, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot move output into place: " + dst.string());
  }
}

void write_mat(const std::filesystem::path& path, const cv::Mat& mat) {
  const auto tmp = temp_sibling(path);
  bool ok = false;
  try {
    ok = cv::imwrite(tmp.string(), mat);
  } catch (const cv::Exception&) {
    ok = false;
  }
  if (!ok) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot write " + path.string());
  }
  commit(tmp, path);
}

}  // namespace

PlanarImage read_image(const std::filesystem::path& path) {
  cv::Mat mat;
  try {
    mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception&) {
    mat.release();
  }
  if (mat.empty()) throw Error(ErrorKind::Io, "cannot decode " + path.string());

  double scale = 1.0;
  switch (mat.depth()) {
    case CV_8U: scale = 1.0 / 255.0; break;
    case CV_16U: scale = 1.0 / 65535.0; break;
    default:
      throw Error(ErrorKind::Io, "unsupported sample depth in " + path.string());
  }
  const int cn = mat.channels();
  if (cn != 1 && cn != 3 && cn != 4)
    throw Error(ErrorKind::Io, "unsupported channel count in " + path.string());
  cv::Mat f;
  mat.convertTo(f, CV_MAKETYPE(CV_32F, cn), scale);

  const int out_c = cn == 1 ? 1 : 3;
  PlanarImage img(f.cols, f.rows, out_c);
  for (int y = 0; y < f.rows; ++y) {
    const float* row = f.ptr<float>(y);
    for (int x = 0; x < f.cols; ++x) {
      if (out_c == 1) {
        img.at(x, y) = row[x];
      } else {  // BGR(A) -> RGB
        img.at(x, y, 0) = row[x * cn + 2];
        img.at(x, y, 1) = row[x * cn + 1];
        img.at(x, y, 2) = row[x * cn + 0];
      }
    }
  }
  return img;
}

void write_png16(const std::filesystem::path& path, const PlanarImage& img) {
  require(img.channels() == 1 || img.channels() == 3, ErrorKind::InvalidInput,
          "write_png16 expects 1 or 3 channels");
  const int cn = img.channels();
  cv::Mat mat(img.height(), img.width(), CV_MAKETYPE(CV_16U, cn));
  for (int y = 0; y < img.height(); ++y) {
    auto* row = mat.ptr<std::uint16_t>(y);
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < cn; ++c) {
        const int dst_c = cn == 3 ? 2 - c : 0;  // RGB -> BGR
        const float v = std::clamp(img.at(x, y, c), 0.0f, 1.0f);
        row[x * cn + dst_c] = static_cast<std::uint16_t>(std::lround(v * 65535.0f));
      }
  }
  write_mat(path, mat);
}

void write_mask_png8(const std::filesystem::path& path, const Mask& m) {
  cv::Mat mat(m.height(), m.width(), CV_8UC1);
  for (int y = 0; y < m.height(); ++y) {
    auto* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < m.width(); ++x)
      row[x] = static_cast<std::uint8_t>(std::lround(255.0f * m.at(x, y)));
  }
  write_mat(path, mat);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = temp_sibling(path);
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
    os << text;
    if (!os) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorKind::Io, "cannot write " + path.string());
    }
  }
  commit(tmp, path);
}

}  // namespace hz
