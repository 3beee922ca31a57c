# Data generators package
from .crop_feature_generator import CropFeatureGenerator
from .event_time_generator import EventTimeGenerator, sample_event_time
from .image_generator import ImageGenerator, NoduleGenerator, synth_base_images
