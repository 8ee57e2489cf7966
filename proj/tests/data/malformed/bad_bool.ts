@classLabel maybe
@data
