from sta_mdct.saliency.layer_cam import SaliencyMap, layer_cam, layer_cam_from_activations, saliency_shift
from sta_mdct.saliency.render import read_pgm, render

__all__ = ["SaliencyMap", "layer_cam", "layer_cam_from_activations", "read_pgm", "render", "saliency_shift"]
