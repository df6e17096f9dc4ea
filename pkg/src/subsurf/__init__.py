"""Seismic structural interpretation toolkit.

Volumes and I/O, structural attributes (tensor coherence, directional Sobel,
3D gradient of texture, GLCM), fault detection and tracking, salt-dome
delineation and tracking, texture features with similarity retrieval,
over-segmentation, and constrained NMF pixel annotation.
"""

from .attributes import AttributeVolume, GoTParams, glcm_features, \
    glcm_matrix, got3d, gtc, gtc_discontinuity, perceptual_dissimilarity, \
    sobel_directional, sobel_magnitude
from .errors import DataError, DegenerateInputError, GeometryError, \
    SegyFormatError, SubsurfError
from .fault import FaultFeature, FaultNetwork, HoughParams, PruneParams, \
    TrackParams, connect_features, detect_faults, discontinuity_map, \
    extract_fault_features, hough_accumulator, prune_false_features, \
    threshold_mask, track_faults_sections
from .features import CzekanowskiKNN, FeatureConfig, \
    czekanowski_similarity, retrieve_similar, texture_feature_vector
from .labeling import AugmentedDataset, LabelVolume, SuperpixelMap, \
    label_volume, oversegment_slic_gray
from .multilinear import SubspaceBasis, fold, leading_eig_ratio, mode_product, \
    mpca_fit, subspace_project, unfold
from .nmf import NMFModel, hoyer_sparsity, nmf_pixel_annotation, \
    project_to_sparsity, sonmf_iterate, sonmf_objective
from .salt import BoundaryCurve, BoundaryTensorSet, build_boundary_tensors, \
    delineate_salt_boundary, moore_contour, salt_component, \
    track_salt_boundary, track_salt_sections
from .segy import ibm32_to_float, load_segy, write_segy
from .synthetic import EllipsoidSpec, FaultSpec, SyntheticSpec, \
    TextureSplitSpec, composite_texture_dataset, generate_synthetic, \
    layered_patch, noise_patch, stripe_patch
from .volume import GroundTruth, SeismicVolume, Section2D, extract_section, \
    insert_section, read_svol, read_svol_volume, write_svol

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
