#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vtsize/components.hpp"
#include "vtsize/edge_refine.hpp"
#include "vtsize/filters.hpp"
#include "vtsize/mask_gen.hpp"
#include "vtsize/measure.hpp"
#include "vtsize/morphology.hpp"
#include "vtsize/pose.hpp"
#include "vtsize/size_eval.hpp"
#include "vtsize/skeleton.hpp"
#include "vtsize/wrinkle.hpp"

namespace py = pybind11;
using namespace vtsize;

namespace {

GrayImage gray_from_array(const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw InvalidInput("expected a 2-D float array");
    GrayImage img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    std::copy(a.data(), a.data() + a.size(), img.data.begin());
    return img;
}

py::array_t<float> gray_to_array(const GrayImage& img) {
    py::array_t<float> a({img.height, img.width});
    std::copy(img.data.begin(), img.data.end(), a.mutable_data());
    return a;
}

BinaryMask mask_from_array(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw InvalidInput("expected a 2-D uint8 array");
    BinaryMask m(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    const auto* src = a.data();
    for (size_t i = 0; i < m.data.size(); ++i) m.data[i] = src[i] ? 1 : 0;
    return m;
}

py::array_t<std::uint8_t> mask_to_array(const BinaryMask& m) {
    py::array_t<std::uint8_t> a({m.height, m.width});
    std::copy(m.data.begin(), m.data.end(), a.mutable_data());
    return a;
}

RgbImage rgb_from_array(const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 3 || a.shape(2) != 3) throw InvalidInput("expected an (H,W,3) float array");
    RgbImage img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    std::copy(a.data(), a.data() + a.size(), img.data.begin());
    return img;
}

py::array_t<float> rgb_to_array(const RgbImage& img) {
    py::array_t<float> a({img.height, img.width, 3});
    std::copy(img.data.begin(), img.data.end(), a.mutable_data());
    return a;
}

StructuringElement se_from(const std::string& shape, int radius) {
    if (shape == "square") return StructuringElement::square(radius);
    if (shape == "cross") return StructuringElement::cross(radius);
    if (shape == "disk") return StructuringElement::disk(radius);
    throw InvalidInput("unknown structuring element shape '" + shape + "'");
}

PoseKeypoints keypoints_from(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2 || a.shape(1) != 3) throw InvalidInput("expected an (N,3) keypoint array");
    PoseKeypoints kp;
    for (py::ssize_t i = 0; i < a.shape(0); ++i)
        kp.points.push_back({a.at(i, 0), a.at(i, 1), a.at(i, 2)});
    return kp;
}

} // namespace

PYBIND11_MODULE(_vtsize, m) {
    m.doc() = "Multi-size try-on masks and garment size evaluation";

    py::register_exception<InvalidInput>(m, "InvalidInputError", PyExc_ValueError);
    py::register_exception<MeasurementError>(m, "MeasurementError", PyExc_RuntimeError);

    m.def("gaussian5x5",
          [](const py::array_t<float, py::array::c_style | py::array::forcecast>& img) {
              return gray_to_array(gaussian5x5(gray_from_array(img)));
          },
          py::arg("image"));

    m.def("frangi",
          [](const py::array_t<float, py::array::c_style | py::array::forcecast>& img,
             std::vector<double> scales, double beta, double c) {
              FrangiParams p;
              if (!scales.empty()) p.scales = std::move(scales);
              p.beta = beta;
              p.c = c;
              return gray_to_array(frangi(gray_from_array(img), p));
          },
          py::arg("image"), py::arg("scales") = std::vector<double>{}, py::arg("beta") = 0.5,
          py::arg("c") = 0.08);

    m.def("gabor_bank",
          [](const py::array_t<float, py::array::c_style | py::array::forcecast>& img,
             std::vector<double> orientations, double wavelength, double sigma) {
              GaborParams p;
              if (!orientations.empty()) p.orientations_deg = std::move(orientations);
              p.wavelength = wavelength;
              p.sigma = sigma;
              return gray_to_array(gabor_bank(gray_from_array(img), p));
          },
          py::arg("image"), py::arg("orientations") = std::vector<double>{},
          py::arg("wavelength") = 8.0, py::arg("sigma") = 4.0);

    const char* shape_doc = "square | cross | disk";
    m.def("dilate",
          [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& mask,
             const std::string& shape, int radius, int iterations) {
              return mask_to_array(dilate(mask_from_array(mask), se_from(shape, radius), iterations));
          },
          py::arg("mask"), py::arg("shape") = "square", py::arg("radius") = 1,
          py::arg("iterations") = 1, shape_doc);
    m.def("erode",
          [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& mask,
             const std::string& shape, int radius, int iterations) {
              return mask_to_array(erode(mask_from_array(mask), se_from(shape, radius), iterations));
          },
          py::arg("mask"), py::arg("shape") = "square", py::arg("radius") = 1,
          py::arg("iterations") = 1);
    m.def("open",
          [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& mask,
             const std::string& shape, int radius, int iterations) {
              return mask_to_array(open(mask_from_array(mask), se_from(shape, radius), iterations));
          },
          py::arg("mask"), py::arg("shape") = "square", py::arg("radius") = 1,
          py::arg("iterations") = 1);
    m.def("close",
          [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& mask,
             const std::string& shape, int radius, int iterations) {
              return mask_to_array(close(mask_from_array(mask), se_from(shape, radius), iterations));
          },
          py::arg("mask"), py::arg("shape") = "square", py::arg("radius") = 1,
          py::arg("iterations") = 1);

    m.def("skeletonize",
          [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& mask) {
              return mask_to_array(skeletonize(mask_from_array(mask)));
          },
          py::arg("mask"));
    m.def("skeleton_length",
          [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& mask) {
              return skeleton_length(mask_from_array(mask));
          },
          py::arg("skeleton"));

    m.def("connected_components",
          [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& mask,
             int connectivity) {
              py::list out;
              for (const auto& c : connected_components(mask_from_array(mask), connectivity)) {
                  py::dict d;
                  d["area"] = c.area;
                  d["centroid"] = py::make_tuple(c.centroid_x, c.centroid_y);
                  d["bbox"] = py::make_tuple(c.min_x, c.min_y, c.max_x, c.max_y);
                  d["orientation_deg"] = c.orientation_deg;
                  out.append(d);
              }
              return out;
          },
          py::arg("mask"), py::arg("connectivity") = 8);

    m.def("coarse_mask",
          [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& tight,
             const py::array_t<double, py::array::c_style | py::array::forcecast>& keypoints,
             int level) {
              return mask_to_array(coarse_mask(mask_from_array(tight), keypoints_from(keypoints),
                                               SizeLevel(level)));
          },
          py::arg("tight_mask"), py::arg("keypoints"), py::arg("level"));

    m.def("multi_size_masks",
          [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& tight,
             const py::array_t<double, py::array::c_style | py::array::forcecast>& keypoints) {
              const auto masks = multi_size_masks(mask_from_array(tight), keypoints_from(keypoints));
              return py::make_tuple(mask_to_array(masks[0]), mask_to_array(masks[1]),
                                    mask_to_array(masks[2]));
          },
          py::arg("tight_mask"), py::arg("keypoints"));

    m.def("adjust_garment",
          [](const py::array_t<float, py::array::c_style | py::array::forcecast>& garment, int level) {
              return rgb_to_array(adjust_garment(rgb_from_array(garment), SizeLevel(level)));
          },
          py::arg("garment"), py::arg("level"));

    m.def("edge_mask",
          [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& mask, int band) {
              return mask_to_array(edge_mask(mask_from_array(mask), band));
          },
          py::arg("mask"), py::arg("band") = 7);
    m.def("refine_mask_classical",
          [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& mask, int band) {
              return mask_to_array(refine_mask_classical(mask_from_array(mask), band));
          },
          py::arg("mask"), py::arg("band") = 7);

    m.def("compensation_ratio",
          [](double length, double a, double b, double c, double d) {
              return compensation_ratio(length, CompensationThresholds{a, b, c, d});
          },
          py::arg("length"), py::arg("a") = 5000.0, py::arg("b") = 10000.0, py::arg("c") = 15000.0,
          py::arg("d") = 20000.0);
    m.def("compensated_length",
          [](double measured, double length, double a, double b, double c, double d) {
              return compensated_length(measured, length, CompensationThresholds{a, b, c, d});
          },
          py::arg("measured"), py::arg("length"), py::arg("a") = 5000.0, py::arg("b") = 10000.0,
          py::arg("c") = 15000.0, py::arg("d") = 20000.0);

    m.def("error_metrics",
          [](const std::vector<double>& observed, double standard) {
              const auto m_ = error_metrics(observed, standard);
              py::dict d;
              d["mae"] = m_.mae;
              d["rmse"] = m_.rmse;
              d["mape"] = m_.mape;
              d["smape"] = m_.smape;
              return d;
          },
          py::arg("observed"), py::arg("standard"));

    m.def("weighted_score",
          [](const std::array<double, 4>& scores, const std::array<double, 4>& level_measurements) {
              SizeTriplet t;
              t.cl.value[0] = level_measurements[0];
              t.sl.value[0] = level_measurements[1];
              t.sw.value[0] = level_measurements[2];
              t.ww.value[0] = level_measurements[3];
              t.cl.valid[0] = t.sl.valid[0] = t.sw.valid[0] = t.ww.valid[0] = true;
              return weighted_score(scores, {true, true, true, true}, t, 1);
          },
          py::arg("scores"), py::arg("measurements"),
          "scores and measurements ordered CL, SL, SW, WW");

    m.def("measure_regions",
          [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& body,
             const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& left,
             const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& right) {
              GarmentRegions regions{mask_from_array(body), mask_from_array(left),
                                     mask_from_array(right)};
              const RawMeasurement r = measure(regions);
              py::dict d;
              d["cl"] = r.cl;
              d["sl"] = r.sl;
              d["sw"] = r.sw;
              d["ww"] = r.ww;
              d["sl_valid"] = r.sl_valid;
              return d;
          },
          py::arg("body"), py::arg("left_sleeve"), py::arg("right_sleeve"));

    m.attr("__version__") = "0.1.0";
}
